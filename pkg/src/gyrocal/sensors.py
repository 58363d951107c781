"""Six-parameter error models for triaxial gyroscopes and accelerometers.

Both sensors use the same model: a diagonal scale matrix plus a bias
vector,

    true = scale * raw + bias        (componentwise)

Cross-axis coupling terms are neglected. Units throughout the package:
angular rates in deg/s, accelerations in m/s^2, with pose acceleration
vectors normalized to unit gravity magnitude before they enter the
dot-product pipeline (see :mod:`gyrocal.calibration`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: Standard gravity, m/s^2.
STANDARD_GRAVITY = 9.80665


def as_vec3(value, name: str = "vector") -> np.ndarray:
    """Coerce to a finite float64 array of shape (3,)."""
    v = np.asarray(value, dtype=np.float64)
    if v.shape != (3,):
        raise ValueError(f"{name} must have 3 components, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite components: {v}")
    return v


def dot(a, b) -> float:
    """Dot product of two 3-vectors."""
    return float(np.dot(as_vec3(a, "a"), as_vec3(b, "b")))


@dataclass(frozen=True)
class GyroParams:
    """Gyroscope scale factors (dimensionless) and bias (deg/s).

    ``scale`` must be strictly positive on every axis; physical MEMS
    scale factors sit near 1 (roughly within +/-10%).
    """

    scale: np.ndarray = field(default_factory=lambda: np.ones(3))
    bias: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "scale", as_vec3(self.scale, "scale"))
        object.__setattr__(self, "bias", as_vec3(self.bias, "bias"))
        if np.any(self.scale <= 0.0):
            raise ValueError(f"scale components must be strictly positive, got {self.scale}")

    @classmethod
    def identity(cls) -> "GyroParams":
        return cls()


@dataclass(frozen=True)
class AccelParams:
    """Accelerometer scale factors (dimensionless) and bias (m/s^2)."""

    scale: np.ndarray = field(default_factory=lambda: np.ones(3))
    bias: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "scale", as_vec3(self.scale, "scale"))
        object.__setattr__(self, "bias", as_vec3(self.bias, "bias"))
        if np.any(self.scale <= 0.0):
            raise ValueError(f"scale components must be strictly positive, got {self.scale}")

    @classmethod
    def identity(cls) -> "AccelParams":
        return cls()


def apply_gyro_calibration(params: GyroParams, raw) -> np.ndarray:
    """Map a raw gyroscope reading to the calibrated angular rate.

    Parameters
    ----------
    params : GyroParams
        Calibration parameters.
    raw : array_like, shape (3,)
        Raw sensor output, deg/s.

    Returns
    -------
    np.ndarray
        ``params.scale * raw + params.bias``, deg/s.
    """
    return params.scale * as_vec3(raw, "raw") + params.bias


def distort_gyro(params: GyroParams, true_rate) -> np.ndarray:
    """Inverse of :func:`apply_gyro_calibration`: synthesize the raw reading
    a sensor with the given parameters would produce for a true rate.

    Round-trips with ``apply_gyro_calibration`` to within 1e-12 relative.
    """
    return (as_vec3(true_rate, "true_rate") - params.bias) / params.scale


def apply_accel_calibration(params: AccelParams, raw) -> np.ndarray:
    """Map a raw accelerometer reading to the calibrated acceleration."""
    return params.scale * as_vec3(raw, "raw") + params.bias


def distort_accel(params: AccelParams, true_accel) -> np.ndarray:
    """Inverse of :func:`apply_accel_calibration` (simulation helper)."""
    return (as_vec3(true_accel, "true_accel") - params.bias) / params.scale
