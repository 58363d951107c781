import numpy as np
import pytest

from gyrocal import (
    AccelParams,
    CalibrationError,
    CalibrationSession,
    DegenerateGeometryError,
    GyroParams,
    PoseObservation,
    SimConfig,
    apply_gyro_calibration,
    build_design_matrix,
    calibrate_gyroscope,
    distort_gyro,
    estimate_gyro_bias,
    fit_accel_params,
    generate_session,
    recover_dot_constant,
    solve_scale_ratios,
)

GRAVITY = 9.80665


def cone_basis(axis):
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    helper = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(axis, helper)
    e1 /= np.linalg.norm(e1)
    return axis, e1, np.cross(axis, e1)


def forward_session(scale, bias, axis, tilt_cos, angles, rotor_speed):
    """Independent forward model: exact noiseless session from truth.

    Gravity directions lie on the cone around the rotation axis; the raw
    gyro reading is the distorted constant rate; static samples sit at
    the distorted zero rate. Returns (session, true dot constant).
    """
    scale = np.asarray(scale, dtype=float)
    bias = np.asarray(bias, dtype=float)
    axis, e1, e2 = cone_basis(axis)
    sin_tilt = np.sqrt(1.0 - tilt_cos**2)
    params = GyroParams(scale=scale, bias=bias)
    raw_gyro = distort_gyro(params, axis * rotor_speed)
    poses = []
    for angle in angles:
        direction = tilt_cos * axis + sin_tilt * (np.cos(angle) * e1 + np.sin(angle) * e2)
        poses.append(PoseObservation(accel_mean=GRAVITY * direction, gyro_mean=raw_gyro))
    static = np.tile(distort_gyro(params, np.zeros(3)), (200, 1))
    session = CalibrationSession(
        poses=tuple(poses), rotor_speed=rotor_speed, static_gyro=static, gravity=GRAVITY
    )
    return session, tilt_cos * rotor_speed


ANGLES_4 = np.array([0.3, 1.9, 3.5, 5.1])


class TestEstimateGyroBias:
    def test_single_sample(self):
        np.testing.assert_array_equal(estimate_gyro_bias([(1, 2, 3)], min_samples=1), [1, 2, 3])

    def test_symmetric_pair(self):
        np.testing.assert_array_equal(
            estimate_gyro_bias([(1, 0, 0), (-1, 0, 0)], min_samples=1), [0, 0, 0]
        )

    def test_noisy_mean_matches_array_mean(self):
        rng = np.random.default_rng(7)
        samples = np.array([0.5, -0.3, 0.2]) + rng.normal(0, 0.1, size=(10_000, 3))
        result = estimate_gyro_bias(samples)
        np.testing.assert_array_equal(result, samples.mean(axis=0))
        np.testing.assert_allclose(result, [0.5, -0.3, 0.2], atol=0.01)

    def test_empty_rejected(self):
        with pytest.raises(CalibrationError, match="no static data"):
            estimate_gyro_bias(np.empty((0, 3)))

    def test_few_samples_warn(self):
        with pytest.warns(UserWarning, match="static samples"):
            estimate_gyro_bias([(1, 2, 3)])


class TestBuildDesignMatrix:
    @pytest.mark.parametrize(
        "accel, gyro, bias, expected",
        [
            ((0, 0, 1), (2, 3, 4), (0, 0, 0), [0, 0, 4]),
            ((1, 0, 0), (5, 9, 9), (0, 0, 0), [5, 0, 0]),
            ((0.6, 0, 0.8), (10, 0, 10), (1, 0, 1), [5.4, 0, 7.2]),
        ],
    )
    def test_single_rows(self, accel, gyro, bias, expected):
        poses = [PoseObservation(accel_mean=accel, gyro_mean=gyro)]
        np.testing.assert_allclose(build_design_matrix(poses, bias), [expected])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            build_design_matrix([], (0, 0, 0))


class TestSolveScaleRatios:
    def test_identity_rows(self):
        np.testing.assert_allclose(solve_scale_ratios(np.eye(3)), [1, 1, 1])

    def test_rank_one_rejected(self):
        with pytest.raises(DegenerateGeometryError, match="degenerate pose geometry"):
            solve_scale_ratios(np.ones((3, 3)))

    def test_forward_model_ratios(self):
        # true scale (1.1, 0.9, 1.2); rotor 20 deg/s at tilt cos 0.5 makes
        # the dot constant 10, so the ratios must be scale/10
        session, constant = forward_session(
            (1.1, 0.9, 1.2), (0, 0, 0), (0.4, 0.5, 0.76), 0.5, ANGLES_4, 20.0
        )
        assert constant == pytest.approx(10.0)
        poses = [
            PoseObservation(accel_mean=p.accel_mean / GRAVITY, gyro_mean=p.gyro_mean)
            for p in session.poses
        ]
        design = build_design_matrix(poses, estimate_gyro_bias(session.static_gyro))
        ratios = solve_scale_ratios(design)
        np.testing.assert_allclose(ratios, [0.11, 0.09, 0.12], atol=1e-9)
        np.testing.assert_allclose(design @ ratios, np.ones(4), atol=1e-9)

    def test_normal_equations_satisfied(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            design = rng.normal(size=(6, 3))
            ratios = solve_scale_ratios(design)
            ones = np.ones(6)
            lhs = design.T @ (design @ ratios - ones)
            assert np.linalg.norm(lhs) / np.linalg.norm(design.T @ ones) < 1e-9


class TestRecoverDotConstant:
    def test_single_pose(self):
        poses = [PoseObservation(accel_mean=(0, 0, 1), gyro_mean=(10, 0, 0))]
        constant = recover_dot_constant((0.1, 0.1, 0.1), poses, (0, 0, 0), 10.0)
        assert constant == pytest.approx(10.0)

    def test_forward_model(self):
        session, constant = forward_session(
            (1.1, 0.9, 1.2), (0, 0, 0), (0.4, 0.5, 0.76), 0.5, ANGLES_4, 20.0
        )
        poses = [
            PoseObservation(accel_mean=p.accel_mean / GRAVITY, gyro_mean=p.gyro_mean)
            for p in session.poses
        ]
        recovered = recover_dot_constant((0.11, 0.09, 0.12), poses, np.zeros(3), 20.0)
        assert recovered == pytest.approx(10.0, abs=1e-9)

    def test_zero_rotation_rejected(self):
        poses = [PoseObservation(accel_mean=(0, 0, 1), gyro_mean=(0, 0, 0))]
        with pytest.raises(CalibrationError, match="rotation not observable"):
            recover_dot_constant((0.1, 0.1, 0.1), poses, (0, 0, 0), 10.0)

    def test_negative_constant_for_negative_ratios(self):
        poses = [PoseObservation(accel_mean=(0, 0, 1), gyro_mean=(10, 0, 0))]
        constant = recover_dot_constant((-0.1, -0.1, -0.1), poses, (0, 0, 0), 10.0)
        assert constant == pytest.approx(-10.0)


class TestCalibrateGyroscope:
    def test_noiseless_recovery(self):
        session, constant = forward_session(
            (1.1, 0.9, 1.2), (0.5, -0.4, 1.0), (0.36, 0.48, 0.8), 0.5, ANGLES_4, 10.0
        )
        estimate = calibrate_gyroscope(session)
        np.testing.assert_allclose(estimate.scale, [1.1, 0.9, 1.2], atol=1e-9)
        np.testing.assert_allclose(estimate.bias, [0.5, -0.4, 1.0], atol=1e-9)
        assert estimate.dot_constant == pytest.approx(constant, abs=1e-9)

    def test_identity_sensor(self):
        session, _ = forward_session(
            (1, 1, 1), (0, 0, 0), (0.36, 0.48, 0.8), 0.4, ANGLES_4, 10.0
        )
        estimate = calibrate_gyroscope(session)
        np.testing.assert_allclose(estimate.scale, [1, 1, 1], atol=1e-9)

    def test_scale_equals_ratios_times_constant(self):
        session, _ = forward_session(
            (1.05, 0.97, 1.1), (0.1, 0.2, -0.3), (0.5, -0.5, 0.7), -0.6, ANGLES_4, 15.0
        )
        estimate = calibrate_gyroscope(session)
        np.testing.assert_array_equal(
            estimate.scale, estimate.scale_ratios * estimate.dot_constant
        )
        assert np.all(estimate.scale > 0)

    def test_downward_tilt_still_positive_scale(self):
        # gravity on the far side of the rotation plane: dot constant < 0
        session, constant = forward_session(
            (1.1, 0.9, 1.2), (0.5, -0.4, 1.0), (0.36, 0.48, 0.8), -0.5, ANGLES_4, 10.0
        )
        assert constant < 0
        estimate = calibrate_gyroscope(session)
        assert estimate.dot_constant == pytest.approx(constant, abs=1e-9)
        np.testing.assert_allclose(estimate.scale, [1.1, 0.9, 1.2], atol=1e-9)

    def test_identical_poses_rejected(self):
        session, _ = forward_session(
            (1.1, 0.9, 1.2), (0, 0, 0), (0.36, 0.48, 0.8), 0.5, np.zeros(4), 10.0
        )
        with pytest.raises(DegenerateGeometryError, match="add poses"):
            calibrate_gyroscope(session)

    def test_implausible_gravity_rejected(self):
        session, _ = forward_session(
            (1, 1, 1), (0, 0, 0), (0.36, 0.48, 0.8), 0.5, ANGLES_4, 10.0
        )
        shaken = CalibrationSession(
            poses=tuple(
                PoseObservation(accel_mean=p.accel_mean * 2.0, gyro_mean=p.gyro_mean)
                for p in session.poses
            ),
            rotor_speed=session.rotor_speed,
            static_gyro=session.static_gyro,
            gravity=session.gravity,
        )
        with pytest.raises(CalibrationError, match="free fall|shaken"):
            calibrate_gyroscope(shaken)

    def test_fewer_than_four_poses_rejected(self):
        session, _ = forward_session(
            (1, 1, 1), (0, 0, 0), (0.36, 0.48, 0.8), 0.5, ANGLES_4, 10.0
        )
        with pytest.raises(DegenerateGeometryError, match="at least 4"):
            CalibrationSession(
                poses=session.poses[:3],
                rotor_speed=session.rotor_speed,
                static_gyro=session.static_gyro,
            )

    def test_oracle_recovery_randomized(self):
        # lighter cousin of the acceptance-suite criterion, via the
        # independent forward model rather than the simulator
        rng = np.random.default_rng(13)
        for _ in range(100):
            scale = rng.uniform(0.9, 1.1, 3)
            bias = rng.uniform(-2, 2, 3)
            axis = rng.uniform(0.2, 1.0, 3) * rng.choice([-1, 1], 3)
            tilt = rng.uniform(0.25, 0.85) * rng.choice([-1, 1])
            count = int(rng.integers(4, 10))
            angles = np.sort(rng.uniform(0, 2 * np.pi, count))
            session, constant = forward_session(scale, bias, axis, tilt, angles, 10.0)
            estimate = calibrate_gyroscope(session)
            np.testing.assert_allclose(estimate.scale, scale, rtol=1e-9)
            np.testing.assert_allclose(estimate.bias, bias, atol=1e-9)
            assert estimate.dot_constant == pytest.approx(constant, abs=1e-9)

    def test_calibrated_dots_less_spread_than_uncalibrated(self):
        rng = np.random.default_rng(17)
        for seed in range(20):
            config = SimConfig(seed=seed, gyro_noise_sigma=0.05)
            synthetic = generate_session(config, np.random.default_rng(rng.integers(1 << 32)))
            estimate = calibrate_gyroscope(synthetic.session)
            d = estimate.diagnostics
            if d.dots_uncalibrated.var() > 0 and not np.allclose(
                synthetic.truth.gyro.scale, 1.0
            ):
                assert d.dots_calibrated.var() < d.dots_uncalibrated.var()

    def test_pose_count_monotonicity_under_noise(self):
        def mean_error(pose_count):
            errors = []
            for seed in range(100):
                config = SimConfig(seed=seed, pose_count=pose_count)
                synthetic = generate_session(config)
                estimate = calibrate_gyroscope(synthetic.session)
                errors.append(np.abs(estimate.scale - synthetic.truth.gyro.scale).mean())
            return np.mean(errors)

        assert mean_error(8) <= mean_error(4)

    def test_rotor_speed_linearity(self):
        kwargs = dict(accel_noise_sigma=0.0, rotor_noise_fraction=0.0, gyro_noise_sigma=0.0, seed=5)
        slow = calibrate_gyroscope(generate_session(SimConfig(rotor_speed=10.0, **kwargs)).session)
        fast = calibrate_gyroscope(generate_session(SimConfig(rotor_speed=20.0, **kwargs)).session)
        np.testing.assert_allclose(slow.scale, fast.scale, atol=1e-9)


class TestFitAccelParams:
    def test_exact_axis_aligned_poses(self):
        poses = GRAVITY * np.array(
            [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]], dtype=float
        )
        params = fit_accel_params(poses, GRAVITY)
        np.testing.assert_allclose(params.scale, [1, 1, 1], atol=1e-9)
        np.testing.assert_allclose(params.bias, [0, 0, 0], atol=1e-9)

    def test_recovers_distortion(self):
        rng = np.random.default_rng(23)
        truth = AccelParams(scale=(1.05, 0.95, 1.02), bias=(0.003, -0.002, 0.004))
        directions = rng.normal(size=(12, 3))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        raw = (GRAVITY * directions - truth.bias) / truth.scale
        params = fit_accel_params(raw, GRAVITY)
        np.testing.assert_allclose(params.scale, truth.scale, atol=1e-6)
        np.testing.assert_allclose(params.bias, truth.bias, atol=1e-6)

    def test_three_coplanar_poses_rejected(self):
        poses = GRAVITY * np.array([[1, 0, 0], [0, 1, 0], [-1, 0, 0]], dtype=float)
        with pytest.raises(DegenerateGeometryError):
            fit_accel_params(poses, GRAVITY)

    def test_many_coplanar_poses_rejected(self):
        angles = np.linspace(0, 2 * np.pi, 8, endpoint=False)
        poses = GRAVITY * np.column_stack(
            [np.cos(angles), np.sin(angles), np.zeros_like(angles)]
        )
        with pytest.raises(DegenerateGeometryError, match="coplanar"):
            fit_accel_params(poses, GRAVITY)


def test_session_rejects_nonpositive_rotor_speed():
    session, _ = forward_session((1, 1, 1), (0, 0, 0), (0.36, 0.48, 0.8), 0.5, ANGLES_4, 10.0)
    with pytest.raises(ValueError, match="rotor_speed"):
        CalibrationSession(
            poses=session.poses, rotor_speed=0.0, static_gyro=session.static_gyro
        )


def test_round_trip_through_sensor_model():
    # estimate from calibrate_gyroscope undoes distort_gyro on fresh data
    session, _ = forward_session(
        (1.1, 0.9, 1.2), (0.5, -0.4, 1.0), (0.36, 0.48, 0.8), 0.5, ANGLES_4, 10.0
    )
    estimate = calibrate_gyroscope(session)
    truth = GyroParams(scale=(1.1, 0.9, 1.2), bias=(0.5, -0.4, 1.0))
    rate = np.array([3.0, -7.0, 12.0])
    raw = distort_gyro(truth, rate)
    np.testing.assert_allclose(apply_gyro_calibration(estimate.params, raw), rate, atol=1e-9)
