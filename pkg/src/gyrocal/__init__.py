"""Field calibration of triaxial MEMS gyroscopes.

Estimates per-axis scale factors and biases from static gravity captures
plus constant-speed rotation data, exploiting the pose-invariance of the
dot product between the gravity direction and the rotation-rate vector.
Includes a simulation engine and Monte-Carlo tooling for validating the
estimator under configurable sensor and rotor noise.
"""

from .calibration import (
    CalibrationError,
    CalibrationSession,
    DegenerateGeometryError,
    PoseObservation,
    ScaleEstimate,
    build_design_matrix,
    calibrate_gyroscope,
    estimate_gyro_bias,
    fit_accel_params,
    recover_dot_constant,
    solve_scale_ratios,
)
from .rotation import Quaternion, random_orientation, random_pose, rotate_vector
from .sensors import (
    STANDARD_GRAVITY,
    AccelParams,
    GyroParams,
    apply_accel_calibration,
    apply_gyro_calibration,
    distort_accel,
    distort_gyro,
    dot,
)
from .simulation import (
    MonteCarloReport,
    SessionGeometry,
    SimConfig,
    SyntheticSession,
    add_centrifugal,
    axis_error_study,
    draw_geometry,
    generate_session,
    run_monte_carlo,
    with_noise,
)
from .stats import (
    DotProductSeries,
    SummaryStats,
    compare_distributions,
    dot_product_series,
    summarize,
)

__version__ = "0.1.0"

__all__ = [
    "AccelParams",
    "CalibrationError",
    "CalibrationSession",
    "DegenerateGeometryError",
    "DotProductSeries",
    "GyroParams",
    "MonteCarloReport",
    "PoseObservation",
    "Quaternion",
    "STANDARD_GRAVITY",
    "ScaleEstimate",
    "SessionGeometry",
    "SimConfig",
    "SummaryStats",
    "SyntheticSession",
    "add_centrifugal",
    "apply_accel_calibration",
    "apply_gyro_calibration",
    "axis_error_study",
    "build_design_matrix",
    "calibrate_gyroscope",
    "compare_distributions",
    "distort_accel",
    "distort_gyro",
    "dot",
    "dot_product_series",
    "draw_geometry",
    "estimate_gyro_bias",
    "fit_accel_params",
    "generate_session",
    "random_orientation",
    "random_pose",
    "recover_dot_constant",
    "rotate_vector",
    "run_monte_carlo",
    "solve_scale_ratios",
    "summarize",
    "with_noise",
]
