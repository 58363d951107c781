"""Gyroscope scale-factor and bias estimation from rotor sessions.

The measurement setup: the IMU spins at a constant, known rotor speed
about an axis that is fixed in the sensor body frame, and is parked at
several angular positions around that axis to capture the gravity
direction. Because every pose is a rotation about the same axis, the dot
product between the (unit-normalized) gravity vector and the true
angular-rate vector is the same constant at every pose. Scale errors
break that consistency, which makes them observable:

1. Average the static gyroscope output. Under ``true = scale*raw + bias``
   a resting sensor reads ``-bias/scale``, so subtracting the static mean
   from the rotating readings leaves exactly ``rate/scale``.
2. Stack one row per pose of the componentwise products
   ``accel * gyro`` into a design matrix X and solve ``X r = 1`` by least
   squares. The solution r equals ``scale / c`` where c is the unknown
   gravity-rotation dot-product constant.
3. Fix c from the known rotor speed: at every pose
   ``|r * gyro| * |c| = rotor_speed``. The sign of c is chosen so the
   scale factors come out positive.

The whole pipeline is linear algebra on a handful of 3-vectors; no
iterative optimization is involved (except for the optional accelerometer
pre-calibration, a gravity-sphere fit).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .sensors import STANDARD_GRAVITY, AccelParams, GyroParams, as_vec3

#: Design matrices with a condition number above this are treated as
#: rank-deficient (degenerate pose geometry).
CONDITION_LIMIT = 1e8

#: Fewer static samples than this triggers a noisy-bias warning.
MIN_STATIC_SAMPLES = 100


class CalibrationError(ValueError):
    """Calibration could not be completed on the given data."""


class DegenerateGeometryError(CalibrationError):
    """Pose geometry does not constrain all three axes."""


@dataclass(frozen=True)
class PoseObservation:
    """One mounting position: mean accelerometer vector at rest plus the
    mean raw gyroscope vector recorded while rotating at that position.
    """

    accel_mean: np.ndarray  # m/s^2 (or unit gravity once normalized)
    gyro_mean: np.ndarray  # deg/s, raw
    sample_count: int = 1

    def __post_init__(self):
        object.__setattr__(self, "accel_mean", as_vec3(self.accel_mean, "accel_mean"))
        object.__setattr__(self, "gyro_mean", as_vec3(self.gyro_mean, "gyro_mean"))
        if self.sample_count < 1:
            raise ValueError(f"sample_count must be >= 1, got {self.sample_count}")


@dataclass(frozen=True)
class CalibrationSession:
    """Everything one calibration run needs.

    ``static_gyro`` holds raw resting gyroscope samples, shape (n, 3).
    ``accel_cal_means`` optionally carries free-orientation static
    accelerometer means (not tied to rotor poses) for
    :func:`fit_accel_params`; the rotor poses themselves lie on a circle
    of the gravity sphere and cannot constrain a sphere fit.
    """

    poses: tuple[PoseObservation, ...]
    rotor_speed: float  # deg/s
    static_gyro: np.ndarray  # (n, 3) raw samples, deg/s
    gravity: float = STANDARD_GRAVITY  # m/s^2
    accel_cal_means: tuple[np.ndarray, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "poses", tuple(self.poses))
        if len(self.poses) < 4:
            raise DegenerateGeometryError(
                f"at least 4 distinct poses are required, got {len(self.poses)}"
            )
        if not self.rotor_speed > 0.0:
            raise ValueError(f"rotor_speed must be positive, got {self.rotor_speed}")
        if not self.gravity > 0.0:
            raise ValueError(f"gravity must be positive, got {self.gravity}")
        static = np.atleast_2d(np.asarray(self.static_gyro, dtype=np.float64))
        if static.size and (static.ndim != 2 or static.shape[1] != 3):
            raise ValueError(f"static_gyro must have shape (n, 3), got {static.shape}")
        if not np.all(np.isfinite(static)):
            raise ValueError("static_gyro contains non-finite samples")
        object.__setattr__(self, "static_gyro", static)
        object.__setattr__(
            self,
            "accel_cal_means",
            tuple(as_vec3(a, "accel_cal_mean") for a in self.accel_cal_means),
        )


@dataclass(frozen=True)
class Diagnostics:
    residual_norm: float  # |X r - 1|
    normal_eq_residual: float  # |X^T (X r - 1)| / |X^T 1|
    condition_number: float
    dots_uncalibrated: np.ndarray  # per-pose accel . gyro, bias removed
    dots_calibrated: np.ndarray  # per-pose accel . (scale * gyro)


@dataclass(frozen=True)
class ScaleEstimate:
    """Result of :func:`calibrate_gyroscope`.

    ``scale == scale_ratios * dot_constant`` exactly by construction.
    """

    scale_ratios: np.ndarray  # least-squares solution of X r = 1
    dot_constant: float  # gravity-rotation dot product, deg/s
    scale: np.ndarray  # dimensionless scale factors
    bias: np.ndarray  # deg/s, model-domain (true = scale*raw + bias)
    static_mean: np.ndarray  # raw-domain static mean subtracted from the data
    diagnostics: Diagnostics = field(repr=False)

    @property
    def params(self) -> GyroParams:
        return GyroParams(scale=self.scale, bias=self.bias)


def estimate_gyro_bias(static_samples, min_samples: int = MIN_STATIC_SAMPLES) -> np.ndarray:
    """Componentwise mean of raw resting gyroscope samples.

    Note this is the *raw-domain* zero-rate level (``-bias/scale`` under
    the sensor model), which is exactly the quantity to subtract from raw
    rotating data.
    """
    samples = np.atleast_2d(np.asarray(static_samples, dtype=np.float64))
    if samples.size == 0:
        raise CalibrationError("no static data: cannot estimate gyroscope bias")
    if samples.ndim != 2 or samples.shape[1] != 3:
        raise ValueError(f"static samples must have shape (n, 3), got {samples.shape}")
    if samples.shape[0] < min_samples:
        warnings.warn(
            f"only {samples.shape[0]} static samples (recommend >= {min_samples}); "
            "bias estimate may be noisy",
            stacklevel=2,
        )
    return samples.mean(axis=0)


def build_design_matrix(poses, bias) -> np.ndarray:
    """Stack one row per pose of ``accel_mean * (gyro_mean - bias)``.

    ``poses`` must already carry calibrated, gravity-normalized
    accelerometer means.
    """
    poses = list(poses)
    if not poses:
        raise ValueError("poses must be non-empty")
    bias = as_vec3(bias, "bias")
    accel = np.array([p.accel_mean for p in poses])
    gyro = np.array([p.gyro_mean for p in poses]) - bias
    return accel * gyro


def _lstsq_ratios(design: np.ndarray, condition_limit: float) -> tuple[np.ndarray, float]:
    design = np.asarray(design, dtype=np.float64)
    if design.ndim != 2 or design.shape[1] != 3:
        raise ValueError(f"design matrix must be n x 3, got {design.shape}")
    if design.shape[0] < 3:
        raise DegenerateGeometryError("need at least 3 rows to solve for 3 scale ratios")
    ones = np.ones(design.shape[0])
    ratios, _, rank, singular = np.linalg.lstsq(design, ones, rcond=None)
    cond = np.inf if singular[-1] == 0.0 else float(singular[0] / singular[-1])
    if rank < 3 or cond > condition_limit:
        raise DegenerateGeometryError(
            "degenerate pose geometry: add poses with distinct orientations "
            f"(condition number {cond:.3g})"
        )
    return ratios, cond


def solve_scale_ratios(design: np.ndarray, condition_limit: float = CONDITION_LIMIT) -> np.ndarray:
    """Least-squares solution of ``design @ r = 1``.

    Solved through the SVD rather than the normal equations; the result
    satisfies the normal equations to within 1e-9 relative on any
    well-conditioned input. Rank deficiency (condition number beyond
    ``condition_limit``) raises :class:`DegenerateGeometryError`.
    """
    ratios, _ = _lstsq_ratios(design, condition_limit)
    return ratios


def recover_dot_constant(scale_ratios, poses, bias, rotor_speed: float) -> float:
    """Recover the gravity-rotation dot-product constant from the rotor speed.

    At every pose ``|scale_ratios * gyro| * |c| = rotor_speed``; the
    per-pose values of c are averaged. The sign is chosen so that the
    majority of the implied scale factors are positive.
    """
    scale_ratios = as_vec3(scale_ratios, "scale_ratios")
    bias = as_vec3(bias, "bias")
    if not rotor_speed > 0.0:
        raise ValueError(f"rotor_speed must be positive, got {rotor_speed}")
    if np.all(scale_ratios == 0.0):
        raise CalibrationError("scale ratios are all zero")
    values = []
    for i, pose in enumerate(poses):
        rate = np.linalg.norm(scale_ratios * (pose.gyro_mean - bias))
        if rate < 1e-12:
            raise CalibrationError(f"rotation not observable at pose {i}")
        values.append(rotor_speed / rate)
    magnitude = float(np.mean(values))
    sign = 1.0 if np.sum(np.sign(scale_ratios)) >= 0 else -1.0
    return sign * magnitude


def calibrate_gyroscope(
    session: CalibrationSession,
    accel_params: AccelParams | None = None,
    condition_limit: float = CONDITION_LIMIT,
) -> ScaleEstimate:
    """Run the full estimation pipeline on a session.

    Steps: static bias level -> accelerometer calibration and unit-gravity
    normalization -> design matrix -> least-squares scale ratios ->
    dot-constant recovery -> scale factors and model-domain bias.

    Raises
    ------
    DegenerateGeometryError
        Fewer than 4 poses, rank-deficient geometry, or an
        ill-conditioned design matrix.
    CalibrationError
        Unobservable rotation at a pose, implausible gravity magnitude at
        a pose, or scale factors that cannot all be made positive.
    """
    if accel_params is None:
        accel_params = AccelParams.identity()
    static_mean = estimate_gyro_bias(session.static_gyro)

    normalized = []
    for i, pose in enumerate(session.poses):
        accel = (accel_params.scale * pose.accel_mean + accel_params.bias) / session.gravity
        magnitude = np.linalg.norm(accel)
        if not 0.5 < magnitude < 1.5:
            raise CalibrationError(
                f"pose {i}: normalized gravity magnitude {magnitude:.3f} outside (0.5, 1.5); "
                "capture looks shaken or in free fall"
            )
        normalized.append(
            PoseObservation(accel_mean=accel, gyro_mean=pose.gyro_mean, sample_count=pose.sample_count)
        )

    design = build_design_matrix(normalized, static_mean)
    ones = np.ones(design.shape[0])
    ratios, cond = _lstsq_ratios(design, condition_limit)

    constant = recover_dot_constant(ratios, normalized, static_mean, session.rotor_speed)
    scale = ratios * constant
    if np.any(scale <= 0.0):
        raise CalibrationError(
            "sign resolution failed - check rotation direction vs gravity "
            f"(scale factors {scale})"
        )
    bias = -scale * static_mean

    corrected = np.array([p.gyro_mean for p in normalized]) - static_mean
    accel = np.array([p.accel_mean for p in normalized])
    residual = design @ ratios - ones
    xt_ones = design.T @ ones
    diagnostics = Diagnostics(
        residual_norm=float(np.linalg.norm(residual)),
        normal_eq_residual=float(
            np.linalg.norm(design.T @ residual) / np.linalg.norm(xt_ones)
        ),
        condition_number=cond,
        dots_uncalibrated=np.einsum("ij,ij->i", accel, corrected),
        dots_calibrated=np.einsum("ij,ij->i", accel, corrected * scale),
    )
    return ScaleEstimate(
        scale_ratios=ratios,
        dot_constant=constant,
        scale=scale,
        bias=bias,
        static_mean=static_mean,
        diagnostics=diagnostics,
    )


def fit_accel_params(
    static_poses,
    gravity_magnitude: float = STANDARD_GRAVITY,
    step_tolerance: float = 1e-10,
    max_iterations: int = 100,
) -> AccelParams:
    """Fit per-axis accelerometer scale and bias on the gravity sphere.

    Minimizes ``sum_k (|scale*A_k + bias|^2 - g^2)^2`` over static pose
    means ``A_k`` by Levenberg-Marquardt from the identity initial guess.
    Needs at least 6 poses whose gravity directions span 3-D; points on a
    circle (e.g. rotor poses) leave the sphere underdetermined.
    """
    poses = np.atleast_2d(np.asarray(list(static_poses), dtype=np.float64))
    if poses.ndim != 2 or poses.shape[1] != 3:
        raise ValueError(f"static poses must have shape (n, 3), got {poses.shape}")
    if poses.shape[0] < 6:
        raise DegenerateGeometryError(
            f"at least 6 distinct poses are required to fit 6 parameters, got {poses.shape[0]}"
        )
    directions = poses / np.linalg.norm(poses, axis=1, keepdims=True)
    spread = np.linalg.svd(directions - directions.mean(axis=0), compute_uv=False)
    if spread[-1] < 1e-6 * max(spread[0], 1.0):
        raise DegenerateGeometryError(
            "pose gravity directions are coplanar; reorient the sensor in 3-D"
        )

    g_sq = gravity_magnitude**2

    def residuals(p):
        corrected = p[:3] * poses + p[3:]
        return np.einsum("ij,ij->i", corrected, corrected) - g_sq

    def jacobian(p):
        corrected = p[:3] * poses + p[3:]
        return np.hstack([2.0 * corrected * poses, 2.0 * corrected])

    result = least_squares(
        residuals,
        x0=np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0]),
        jac=jacobian,
        method="lm",
        xtol=step_tolerance,
        max_nfev=max_iterations * 10,
    )
    if not result.success:
        raise CalibrationError(
            f"accelerometer fit did not converge: {result.message} "
            f"(residual norm {np.linalg.norm(result.fun):.3g})"
        )
    jac_singular = np.linalg.svd(jacobian(result.x), compute_uv=False)
    if jac_singular[-1] == 0.0 or jac_singular[0] / jac_singular[-1] > CONDITION_LIMIT:
        raise DegenerateGeometryError(
            "accelerometer fit is degenerate; pose geometry does not constrain all parameters"
        )
    scale, offset = result.x[:3], result.x[3:]
    if np.any(scale <= 0.0):
        raise CalibrationError(f"accelerometer fit produced non-positive scale {scale}")
    return AccelParams(scale=scale, bias=offset)
