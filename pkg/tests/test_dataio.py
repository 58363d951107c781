import filecmp

import numpy as np
import pytest

from gyrocal import SimConfig, generate_session
from gyrocal.calibration import DegenerateGeometryError
from gyrocal.dataio import (
    CalibrationOptions,
    ConfigError,
    Segment,
    SessionFile,
    SessionFormatError,
    load_session_file,
    read_accel_params,
    read_config,
    read_gyro_params,
    read_session,
    read_truth_sidecar,
    write_key_value_report,
    write_session,
    write_session_file,
)

MINIMAL = """\
# gyrocal-session 1
# units: time=s gyro=deg/s accel=m/s^2
# rotor_speed: 10.0
# gravity: 9.80665
@static_gyro
0.0 0.1 -0.2 0.3 0.0 0.0 0.0
0.01 0.1 -0.2 0.3 0.0 0.0 0.0
@static_accel pose=1
0.0 0.0 0.0 0.0 0.0 0.0 9.80665
@rotating pose=1
0.0 3.0 4.0 5.0 0.0 0.0 9.80665
@static_accel pose=2
0.0 0.0 0.0 0.0 0.0 9.80665 0.0
@rotating pose=2
0.0 3.0 4.0 5.0 0.0 9.80665 0.0
@static_accel pose=3
0.0 0.0 0.0 0.0 9.80665 0.0 0.0
@rotating pose=3
0.0 3.0 4.0 5.0 9.80665 0.0 0.0
@static_accel pose=4
0.0 0.0 0.0 0.0 0.0 -6.9343 6.9343
@rotating pose=4
0.0 3.0 4.0 5.0 0.0 -6.9343 6.9343
"""


@pytest.fixture
def minimal_path(tmp_path):
    path = tmp_path / "session.txt"
    path.write_text(MINIMAL)
    return path


class TestReadSession:
    def test_minimal_file(self, minimal_path):
        session = read_session(minimal_path)
        assert len(session.poses) == 4
        assert session.rotor_speed == 10.0
        assert session.gravity == 9.80665
        assert session.static_gyro.shape == (2, 3)
        np.testing.assert_array_equal(session.poses[0].gyro_mean, [3, 4, 5])

    def test_missing_pose_pairing(self, tmp_path):
        text = MINIMAL + "@rotating pose=5\n0.0 1.0 1.0 1.0 0.0 0.0 0.0\n"
        path = tmp_path / "bad.txt"
        path.write_text(text)
        with pytest.raises(SessionFormatError, match="pose 5"):
            read_session(path)

    def test_unpaired_static_accel_becomes_accel_cal(self, tmp_path):
        text = MINIMAL + "@static_accel pose=9\n0.0 0.0 0.0 0.0 5.0 5.0 5.0\n"
        path = tmp_path / "extra.txt"
        path.write_text(text)
        session = read_session(path)
        assert len(session.poses) == 4
        assert len(session.accel_cal_means) == 1
        np.testing.assert_array_equal(session.accel_cal_means[0], [5, 5, 5])

    def test_malformed_row_reports_line(self, tmp_path):
        lines = MINIMAL.splitlines()
        lines[6] = "0.01 0.1 not-a-number 0.3 0.0 0.0 0.0"
        path = tmp_path / "bad.txt"
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(SessionFormatError, match=":7:"):
            read_session(path)

    def test_unknown_units_rejected(self, tmp_path):
        path = tmp_path / "units.txt"
        path.write_text(MINIMAL.replace("gyro=deg/s", "gyro=rad/s"))
        with pytest.raises(SessionFormatError, match="units"):
            read_session(path)

    def test_decreasing_timestamps_rejected(self, tmp_path):
        lines = MINIMAL.splitlines()
        lines[6] = "-0.5 0.1 -0.2 0.3 0.0 0.0 0.0"
        path = tmp_path / "time.txt"
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(SessionFormatError, match="non-decreasing"):
            read_session(path)

    def test_per_sample_rows_switch(self, tmp_path):
        text = MINIMAL + "@rotating pose=4\n0.0 3.5 4.5 5.5 0.0 0.0 0.0\n"
        path = tmp_path / "persample.txt"
        path.write_text(text)
        collapsed = read_session(path)
        expanded = read_session(path, per_sample_rows=True)
        assert len(collapsed.poses) == 4
        assert len(expanded.poses) == 5  # pose 4 contributes two rows
        assert collapsed.poses[3].sample_count == 2
        assert all(p.sample_count == 1 for p in expanded.poses)

    def test_three_poses_rejected(self, tmp_path):
        lines = MINIMAL.splitlines()
        path = tmp_path / "three.txt"
        path.write_text("\n".join(lines[: len(lines) - 4]) + "\n")
        with pytest.raises(DegenerateGeometryError, match="at least 4"):
            read_session(path)


class TestWriteSession:
    def test_round_trip_identity(self, minimal_path, tmp_path):
        session = read_session(minimal_path)
        first = tmp_path / "first.txt"
        second = tmp_path / "second.txt"
        write_session(session, first)
        write_session(read_session(first), second)
        assert filecmp.cmp(first, second, shallow=False)
        again = read_session(second)
        for p, q in zip(session.poses, again.poses):
            np.testing.assert_array_equal(p.accel_mean, q.accel_mean)
            np.testing.assert_array_equal(p.gyro_mean, q.gyro_mean)
        np.testing.assert_array_equal(session.static_gyro, again.static_gyro)

    def test_byte_deterministic(self, tmp_path):
        synthetic = generate_session(SimConfig(seed=55, gyro_noise_sigma=0.3))
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        write_session(synthetic, a)
        write_session(synthetic, b)
        assert filecmp.cmp(a, b, shallow=False)
        assert filecmp.cmp(str(a) + ".truth", str(b) + ".truth", shallow=False)

    def test_synthetic_truth_sidecar(self, tmp_path):
        synthetic = generate_session(SimConfig(seed=56))
        path = tmp_path / "syn.txt"
        write_session(synthetic, path)
        truth = read_truth_sidecar(str(path) + ".truth")
        np.testing.assert_allclose(truth.gyro.scale, synthetic.truth.gyro.scale)
        np.testing.assert_allclose(truth.axis, synthetic.truth.axis)
        assert truth.dot_constant == pytest.approx(synthetic.truth.dot_constant)
        # lossless: calibrating the file reproduces the in-memory session
        loaded = read_session(path)
        np.testing.assert_array_equal(
            loaded.poses[0].accel_mean, synthetic.session.poses[0].accel_mean
        )

    def test_empty_static_gyro_rejected(self, minimal_path, tmp_path):
        session = read_session(minimal_path)
        import dataclasses

        broken = dataclasses.replace(session, static_gyro=np.empty((0, 3)))
        with pytest.raises(ValueError, match="static gyroscope"):
            write_session(broken, tmp_path / "broken.txt")

    def test_raw_segment_round_trip(self, tmp_path):
        rows = np.array([[0.0, 1, 2, 3, 4, 5, 6], [0.5, 1.5, 2.5, 3.5, 4.5, 5.5, 6.5]])
        original = SessionFile(
            rotor_speed=12.5,
            gravity=9.80665,
            segments=(
                Segment("static_gyro", None, rows),
                Segment("static_accel", 1, rows),
                Segment("rotating", 1, rows),
            ),
        )
        path = tmp_path / "raw.txt"
        write_session_file(original, path)
        loaded = load_session_file(path)
        assert loaded.rotor_speed == original.rotor_speed
        for a, b in zip(loaded.segments, original.segments):
            assert a.kind == b.kind and a.pose_id == b.pose_id
            np.testing.assert_array_equal(a.rows, b.rows)


class TestReadConfig:
    def test_empty_file_gives_defaults(self, tmp_path):
        path = tmp_path / "empty.cfg"
        path.write_text("")
        config = read_config(path)
        assert config == SimConfig()

    def test_rotor_speed_key(self, tmp_path):
        path = tmp_path / "speed.cfg"
        path.write_text("rotor_speed = 20\n")
        config = read_config(path)
        assert config.rotor_speed == 20.0

    def test_pose_count_validation(self, tmp_path):
        path = tmp_path / "poses.cfg"
        path.write_text("pose_count = 2\n")
        with pytest.raises(ConfigError, match="pose_count"):
            read_config(path)

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "typo.cfg"
        path.write_text("rotor_sped = 20\n")
        with pytest.raises(ConfigError, match="rotor_sped"):
            read_config(path)

    def test_type_mismatch_names_key(self, tmp_path):
        path = tmp_path / "badtype.cfg"
        path.write_text("rotor_speed = fast\n")
        with pytest.raises(ConfigError, match="rotor_speed"):
            read_config(path)

    def test_ranges_and_triples(self, tmp_path):
        path = tmp_path / "full.cfg"
        path.write_text(
            "gyro_scale_range = 0.85 1.15\n"
            "accel_scale_range = 0.95 1.05\n"
            "accel_bias_range = -0.005 0.005\n"
            "gyro_scale_fixed = 1.1 0.9 1.2\n"
            "lever_arm = 0.1 0 0\n"
            "seed = 42\n"
        )
        config = read_config(path)
        assert config.gyro_scale_range == (0.85, 1.15)
        assert config.gyro_scale_fixed == (1.1, 0.9, 1.2)
        assert config.lever_arm == (0.1, 0.0, 0.0)
        assert config.seed == 42

    def test_calibration_kind(self, tmp_path):
        path = tmp_path / "cal.cfg"
        path.write_text("kind = calibration\naccel_cal = fit\nper_sample_rows = true\n")
        options = read_config(path)
        assert isinstance(options, CalibrationOptions)
        assert options.accel_cal == "fit"
        assert options.per_sample_rows is True

    def test_comments_ignored(self, tmp_path):
        path = tmp_path / "comments.cfg"
        path.write_text("# a comment\nrotor_speed = 15 # trailing comment\n")
        assert read_config(path).rotor_speed == 15.0


class TestParamFiles:
    def test_gyro_params_from_report(self, tmp_path):
        path = tmp_path / "report.txt"
        write_key_value_report(
            path, "calibrate", {"session": "s"}, {"scale": "1.1 0.9 1.2", "bias": "0.5 -0.4 1.0"}
        )
        params = read_gyro_params(path)
        np.testing.assert_array_equal(params.scale, [1.1, 0.9, 1.2])
        np.testing.assert_array_equal(params.bias, [0.5, -0.4, 1.0])

    def test_accel_params_file(self, tmp_path):
        path = tmp_path / "accel.txt"
        path.write_text("scale = 1.05 0.95 1.02\nbias = 0.003 -0.002 0.004\n")
        params = read_accel_params(path)
        np.testing.assert_array_equal(params.scale, [1.05, 0.95, 1.02])

    def test_missing_key_rejected(self, tmp_path):
        path = tmp_path / "partial.txt"
        path.write_text("scale = 1 1 1\n")
        with pytest.raises(ConfigError, match="bias"):
            read_gyro_params(path)


class TestAtomicWrites:
    def test_failed_write_leaves_no_file(self, tmp_path, monkeypatch):
        path = tmp_path / "report.txt"

        class Boom(Exception):
            pass

        def exploding_replace(src, dst):
            raise Boom()

        monkeypatch.setattr("gyrocal.dataio.os.replace", exploding_replace)
        with pytest.raises(Boom):
            write_key_value_report(path, "analyze", {}, {"a": "1"})
        assert not path.exists()
        assert list(tmp_path.iterdir()) == []  # temp file cleaned up
