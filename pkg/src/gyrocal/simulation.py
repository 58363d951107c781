"""Synthetic rotor-session generation and Monte-Carlo batteries.

The simulated rig mirrors the physical one: the IMU spins at a constant
rotor speed about an axis that is fixed in the body frame, and is parked
at several angular positions around that axis for static gravity
captures. A session's geometry is therefore an axis direction, a tilt of
gravity relative to that axis (both set once by the installation), and
one rotation angle per pose. Quaternions generate the pose variations of
the gravity vector.

Noise model
-----------
Per-pose means are synthesized directly at the statistics the sample
averages would have: rotor-speed noise (std ``rotor_noise_fraction *
rotor_speed``) and gyroscope white noise are reduced by
``sqrt(rotating_sample_count)``, while the accelerometer pose vector
receives one unaveraged draw of ``accel_noise_sigma`` per axis (static
captures are dominated by slow errors that a short average cannot
remove). Static gyroscope samples are kept as raw rows so bias
estimation sees genuine scatter.

Every noise draw consumes the generator stream even at zero sigma, so
two configs that differ only in noise levels (or rotor speed, or lever
arm) share identical geometry and truth draws for the same seed.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .calibration import (
    CalibrationError,
    CalibrationSession,
    PoseObservation,
    ScaleEstimate,
    calibrate_gyroscope,
    estimate_gyro_bias,
    fit_accel_params,
)
from .rotation import Quaternion, random_pose, random_unit_vector, rotate_vector
from .sensors import (
    STANDARD_GRAVITY,
    AccelParams,
    GyroParams,
    as_vec3,
    distort_accel,
    distort_gyro,
)
from .stats import SummaryStats, summarize

# Geometry rejection margins. An axis with a near-zero component leaves
# that scale factor unobservable; a tilt near 90 deg zeroes the dot
# constant and one near 0 deg collapses the pose circle to a point.
_AXIS_MIN_COMPONENT = 0.15
_TILT_COS_MIN = 0.2
_TILT_COS_MAX = 0.9


@dataclass(frozen=True)
class SimConfig:
    """Simulation protocol knobs.

    Distribution fields are (low, high) uniform bounds; the ``*_fixed``
    fields override the draw with exact per-axis values. ``accel_scale_range``
    and ``accel_bias_range`` set to ``None`` mean an ideal accelerometer.
    ``lever_arm`` (meters, body frame) switches on the centrifugal term
    for accelerometer data captured during rotation; ``None`` means the
    accelerometer is read with the rotor stopped.
    """

    gyro_scale_range: tuple[float, float] = (0.9, 1.1)
    gyro_bias_range: tuple[float, float] = (-2.0, 2.0)  # deg/s
    gyro_scale_fixed: tuple[float, float, float] | None = None
    gyro_bias_fixed: tuple[float, float, float] | None = None
    accel_noise_sigma: float = 0.005  # m/s^2, per axis on a pose mean
    rotor_speed: float = 10.0  # deg/s
    rotor_noise_fraction: float = 0.05  # std = fraction * rotor_speed
    gyro_noise_sigma: float = 0.0  # deg/s, per raw sample
    accel_scale_range: tuple[float, float] | None = None  # None -> ideal
    accel_bias_range: tuple[float, float] | None = None  # m/s^2
    pose_count: int = 6
    rotating_sample_count: int = 5000
    static_sample_count: int = 2000
    accel_cal_pose_count: int = 12
    lever_arm: tuple[float, float, float] | None = None  # meters
    axis_fixed: tuple[float, float, float] | None = None  # body-frame rotation axis
    tilt_cos_fixed: float | None = None  # cos of the gravity-axis angle
    gravity: float = STANDARD_GRAVITY
    seed: int = 0

    def __post_init__(self):
        for name in ("gyro_scale_range", "gyro_bias_range", "accel_scale_range", "accel_bias_range"):
            bounds = getattr(self, name)
            if bounds is None:
                continue
            lo, hi = bounds
            if not lo <= hi:
                raise ValueError(f"{name} bounds must be ordered, got {bounds}")
        if (self.accel_scale_range is None) != (self.accel_bias_range is None):
            raise ValueError("accel_scale_range and accel_bias_range must both be set or both None")
        for name in ("accel_noise_sigma", "rotor_noise_fraction", "gyro_noise_sigma"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0")
        if not self.rotor_speed > 0.0:
            raise ValueError(f"rotor_speed must be positive, got {self.rotor_speed}")
        if self.pose_count < 4:
            raise ValueError(f"pose_count must be >= 4, got {self.pose_count}")
        for name in ("rotating_sample_count", "static_sample_count"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.accel_cal_pose_count < 0:
            raise ValueError("accel_cal_pose_count must be >= 0")
        if not self.gravity > 0.0:
            raise ValueError(f"gravity must be positive, got {self.gravity}")
        if self.gyro_scale_fixed is not None and np.any(np.asarray(self.gyro_scale_fixed) <= 0):
            raise ValueError("gyro_scale_fixed components must be positive")
        if self.axis_fixed is not None and np.linalg.norm(self.axis_fixed) < 1e-12:
            raise ValueError("axis_fixed must be a nonzero vector")
        if self.tilt_cos_fixed is not None and not 0.0 < abs(self.tilt_cos_fixed) < 1.0:
            raise ValueError(f"tilt_cos_fixed must be in (0, 1) in magnitude, got {self.tilt_cos_fixed}")

    @property
    def accel_ideal(self) -> bool:
        return self.accel_scale_range is None


@dataclass(frozen=True)
class SessionGeometry:
    """Installation geometry: rotation axis and the gravity direction at
    the reference pose, both unit vectors in the body frame."""

    axis: np.ndarray
    gravity_dir: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "axis", as_vec3(self.axis, "axis"))
        object.__setattr__(self, "gravity_dir", as_vec3(self.gravity_dir, "gravity_dir"))


@dataclass(frozen=True)
class SessionTruth:
    gyro: GyroParams
    accel: AccelParams
    axis: np.ndarray  # unit rotation axis, body frame
    dot_constant: float  # gravity_dir . (axis * rotor_speed), deg/s
    gravity_dirs: tuple[np.ndarray, ...]  # unit gravity direction per pose


@dataclass(frozen=True)
class SyntheticSession:
    session: CalibrationSession
    truth: SessionTruth


def draw_geometry(
    rng: np.random.Generator,
    axis_fixed=None,
    tilt_cos_fixed: float | None = None,
) -> SessionGeometry:
    """Random installation geometry, rejected into the observable region.

    ``axis_fixed`` and ``tilt_cos_fixed`` pin the corresponding part of
    the installation instead of drawing it (the circle position of the
    reference gravity direction stays random).
    """
    if axis_fixed is not None:
        axis = as_vec3(axis_fixed, "axis_fixed")
        axis = axis / np.linalg.norm(axis)
    else:
        while True:
            axis = random_unit_vector(rng)
            if np.min(np.abs(axis)) >= _AXIS_MIN_COMPONENT:
                break
    if tilt_cos_fixed is not None:
        # build gravity on the cone: cos * axis + sin * (random in-plane direction)
        helper = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        e1 = np.cross(axis, helper)
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(axis, e1)
        psi = rng.uniform(0.0, 2.0 * np.pi)
        sin_tilt = np.sqrt(1.0 - tilt_cos_fixed**2)
        gravity_dir = tilt_cos_fixed * axis + sin_tilt * (np.cos(psi) * e1 + np.sin(psi) * e2)
    else:
        while True:
            gravity_dir = random_unit_vector(rng)
            if _TILT_COS_MIN <= abs(float(np.dot(gravity_dir, axis))) <= _TILT_COS_MAX:
                break
    return SessionGeometry(axis=axis, gravity_dir=gravity_dir)


def add_centrifugal(accel, omega_dps, lever_arm) -> np.ndarray:
    """Add the centrifugal specific-force term sensed at ``lever_arm``
    meters from the rotation axis.

    The term is ``w x (w x r)`` with the rate converted to rad/s: it
    points from the sensor toward the axis (centripetal), has magnitude
    ``|w|^2 * |r_perp|``, and is exactly orthogonal to the rotation rate,
    so it never moves the gravity-rotation dot product.
    """
    accel = as_vec3(accel, "accel")
    omega = np.deg2rad(as_vec3(omega_dps, "omega_dps"))
    lever = as_vec3(lever_arm, "lever_arm")
    return accel + np.cross(omega, np.cross(omega, lever))


def _stratified_angles(rng: np.random.Generator, count: int) -> np.ndarray:
    # one random angle per equal arc: distinct positions, still random
    return (np.arange(count) + rng.random(count)) * (2.0 * np.pi / count)


def _draw_params(config: SimConfig, rng: np.random.Generator) -> tuple[GyroParams, AccelParams]:
    if config.gyro_scale_fixed is not None:
        scale = np.asarray(config.gyro_scale_fixed, dtype=np.float64)
    else:
        scale = rng.uniform(*config.gyro_scale_range, size=3)
    if config.gyro_bias_fixed is not None:
        bias = np.asarray(config.gyro_bias_fixed, dtype=np.float64)
    else:
        bias = rng.uniform(*config.gyro_bias_range, size=3)
    if config.accel_ideal:
        accel = AccelParams.identity()
    else:
        accel = AccelParams(
            scale=rng.uniform(*config.accel_scale_range, size=3),
            bias=rng.uniform(*config.accel_bias_range, size=3),
        )
    return GyroParams(scale=scale, bias=bias), accel


def generate_session(
    config: SimConfig,
    rng: np.random.Generator | None = None,
    geometry: SessionGeometry | None = None,
) -> SyntheticSession:
    """Synthesize one calibration session plus its ground truth.

    With all noise sigmas at zero the forward model reproduces the
    session exactly from the recorded truth. Identical config and
    generator state give bit-identical sessions.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    gyro_truth, accel_truth = _draw_params(config, rng)
    if geometry is None:
        geometry = draw_geometry(rng, config.axis_fixed, config.tilt_cos_fixed)
    axis, gravity_dir = geometry.axis, geometry.gravity_dir

    n = config.pose_count
    angles = _stratified_angles(rng, n)
    rotor_mean_sigma = config.rotor_noise_fraction * config.rotor_speed / np.sqrt(
        config.rotating_sample_count
    )
    gyro_mean_sigma = config.gyro_noise_sigma / np.sqrt(config.rotating_sample_count)
    rotor_noise = rng.standard_normal(n) * rotor_mean_sigma
    gyro_noise = rng.standard_normal((n, 3)) * gyro_mean_sigma
    accel_noise = rng.standard_normal((n, 3)) * config.accel_noise_sigma

    poses = []
    gravity_dirs = []
    for i in range(n):
        direction = rotate_vector(Quaternion.from_axis_angle(axis, angles[i]), gravity_dir)
        gravity_dirs.append(direction)
        rate = axis * (config.rotor_speed + rotor_noise[i])
        gyro_mean = distort_gyro(gyro_truth, rate) + gyro_noise[i]
        accel_true = config.gravity * direction
        if config.lever_arm is not None:
            accel_true = add_centrifugal(accel_true, axis * config.rotor_speed, config.lever_arm)
        accel_mean = distort_accel(accel_truth, accel_true) + accel_noise[i]
        poses.append(
            PoseObservation(
                accel_mean=accel_mean,
                gyro_mean=gyro_mean,
                sample_count=config.rotating_sample_count,
            )
        )

    static_level = distort_gyro(gyro_truth, np.zeros(3))
    static_gyro = static_level + rng.standard_normal(
        (config.static_sample_count, 3)
    ) * config.gyro_noise_sigma

    accel_cal_means = []
    for _ in range(config.accel_cal_pose_count):
        direction = random_unit_vector(rng)
        noise = rng.standard_normal(3) * config.accel_noise_sigma
        accel_cal_means.append(distort_accel(accel_truth, config.gravity * direction) + noise)

    session = CalibrationSession(
        poses=tuple(poses),
        rotor_speed=config.rotor_speed,
        static_gyro=static_gyro,
        gravity=config.gravity,
        accel_cal_means=tuple(accel_cal_means),
    )
    truth = SessionTruth(
        gyro=gyro_truth,
        accel=accel_truth,
        axis=axis,
        dot_constant=float(np.dot(gravity_dir, axis)) * config.rotor_speed,
        gravity_dirs=tuple(gravity_dirs),
    )
    return SyntheticSession(session=session, truth=truth)


def _child_seed(seed: int, index: int) -> np.random.SeedSequence:
    # identical to SeedSequence(seed).spawn(...)[index]: order-independent
    return np.random.SeedSequence(entropy=seed, spawn_key=(index,))


def battery_geometry(config: SimConfig) -> SessionGeometry:
    """The fixed installation a Monte-Carlo battery shares across runs."""
    rng = np.random.default_rng(_child_seed(config.seed, 0))
    return draw_geometry(rng, config.axis_fixed, config.tilt_cos_fixed)


def _calibrate_generated(synthetic: SyntheticSession, accel_calibration: str) -> ScaleEstimate:
    if accel_calibration == "fit":
        params = fit_accel_params(synthetic.session.accel_cal_means, synthetic.session.gravity)
    else:
        params = AccelParams.identity()
    return calibrate_gyroscope(synthetic.session, params)


def _run_indices(
    config: SimConfig,
    geometry: SessionGeometry,
    indices: Sequence[int],
    accel_calibration: str,
):
    results = []
    for i in indices:
        rng = np.random.default_rng(_child_seed(config.seed, i + 1))
        synthetic = generate_session(config, rng, geometry)
        try:
            estimate = _calibrate_generated(synthetic, accel_calibration)
        except CalibrationError as exc:
            results.append((i, None, None, str(exc)))
            continue
        results.append((i, estimate.scale, synthetic.truth.gyro.scale, None))
    return results


@dataclass(frozen=True)
class MonteCarloReport:
    """Per-axis distributions of the estimated scale factors over a
    battery of simulated sessions."""

    runs: int
    failures: int
    seed: int
    gyro_noise_sigma: float
    scale_stats: tuple[SummaryStats, SummaryStats, SummaryStats]
    error_stats: tuple[SummaryStats, SummaryStats, SummaryStats]  # estimate - truth


def run_monte_carlo(
    config: SimConfig,
    runs: int,
    workers: int = 1,
    accel_calibration: str = "auto",
) -> MonteCarloReport:
    """Repeat generate-and-calibrate ``runs`` times and summarize.

    Run i draws from a substream derived from ``(config.seed, i)``, so
    the report is identical for any ``workers`` count. The installation
    geometry is drawn once per battery; poses, parameters and noise are
    redrawn every run. Individual calibration failures are counted and
    tolerated up to 10% of runs.
    """
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    if accel_calibration == "auto":
        accel_calibration = "identity" if config.accel_ideal else "fit"
    if accel_calibration not in ("identity", "fit"):
        raise ValueError(f"unknown accel_calibration {accel_calibration!r}")

    geometry = battery_geometry(config)
    indices = np.arange(runs)
    if workers == 1:
        results = _run_indices(config, geometry, indices, accel_calibration)
    else:
        chunks = [c for c in np.array_split(indices, workers * 4) if c.size]
        results = []
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_run_indices, config, geometry, chunk.tolist(), accel_calibration)
                for chunk in chunks
            ]
            for future in futures:
                results.extend(future.result())
    results.sort(key=lambda item: item[0])

    estimates = np.array([r[1] for r in results if r[3] is None])
    truths = np.array([r[2] for r in results if r[3] is None])
    failures = sum(1 for r in results if r[3] is not None)
    if failures > 0.1 * runs:
        raise CalibrationError(
            f"{failures}/{runs} Monte-Carlo runs failed; first error: "
            f"{next(r[3] for r in results if r[3] is not None)}"
        )
    errors = estimates - truths
    return MonteCarloReport(
        runs=runs,
        failures=failures,
        seed=config.seed,
        gyro_noise_sigma=config.gyro_noise_sigma,
        scale_stats=tuple(summarize(estimates[:, j]) for j in range(3)),
        error_stats=tuple(summarize(errors[:, j]) for j in range(3)),
    )


@dataclass(frozen=True)
class AxisErrorReport:
    """Per-axis dot-product term errors pooled over poses and trials,
    before and after calibration (the 100-trial robustness study)."""

    trials: int
    failures: int
    uncalibrated: tuple[SummaryStats, SummaryStats, SummaryStats]
    calibrated: tuple[SummaryStats, SummaryStats, SummaryStats]
    uncalibrated_abs_mean: tuple[float, float, float]
    calibrated_abs_mean: tuple[float, float, float]


def axis_error_study(config: SimConfig, trials: int = 100) -> AxisErrorReport:
    """Repeat generate-and-calibrate and collect, per trial and axis, the
    error of that axis' contribution to the gravity-rotation dot product.

    Axis j's contribution at a pose is ``a_j * g_j * k_j`` with ``a`` the
    unit-normalized gravity vector and ``g`` the static-mean-corrected
    raw gyro vector; its error (averaged over the trial's poses) is
    ``mean_i(a_ij * g_ij) * (k_j - k_true_j)``, with k_j = 1 for the
    uncalibrated case. One value per trial and axis, as in a box plot
    over repeated simulations. Both signed means and mean absolute
    errors are reported.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    geometry = battery_geometry(config)
    uncal = [[] for _ in range(3)]
    cal = [[] for _ in range(3)]
    failures = 0
    for i in range(trials):
        rng = np.random.default_rng(_child_seed(config.seed, i + 1))
        synthetic = generate_session(config, rng, geometry)
        try:
            estimate = _calibrate_generated(
                synthetic, "identity" if config.accel_ideal else "fit"
            )
        except CalibrationError:
            failures += 1
            continue
        session = synthetic.session
        accel = np.array([p.accel_mean for p in session.poses]) / session.gravity
        corrected = np.array([p.gyro_mean for p in session.poses]) - estimate.static_mean
        mean_terms = (accel * corrected).mean(axis=0)  # per-axis contribution
        true_scale = synthetic.truth.gyro.scale
        for j in range(3):
            uncal[j].append(mean_terms[j] * (1.0 - true_scale[j]))
            cal[j].append(mean_terms[j] * (estimate.scale[j] - true_scale[j]))
    if failures > 0.1 * trials:
        raise CalibrationError(f"{failures}/{trials} study trials failed")
    return AxisErrorReport(
        trials=trials,
        failures=failures,
        uncalibrated=tuple(summarize(uncal[j]) for j in range(3)),
        calibrated=tuple(summarize(cal[j]) for j in range(3)),
        uncalibrated_abs_mean=tuple(float(np.mean(np.abs(uncal[j]))) for j in range(3)),
        calibrated_abs_mean=tuple(float(np.mean(np.abs(cal[j]))) for j in range(3)),
    )


def with_noise(config: SimConfig, gyro_noise_sigma: float) -> SimConfig:
    """Copy of ``config`` at a different gyroscope noise level."""
    return replace(config, gyro_noise_sigma=gyro_noise_sigma)
