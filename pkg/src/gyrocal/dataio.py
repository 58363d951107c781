"""File formats: session logs, config files, truth sidecars, reports.

Session log format (plain text, inspectable in the field)::

    # gyrocal-session 1
    # units: time=s gyro=deg/s accel=m/s^2
    # rotor_speed: 10.0
    # gravity: 9.80665
    @static_gyro
    <t> <gx> <gy> <gz> <ax> <ay> <az>
    ...
    @static_accel pose=1
    ...
    @rotating pose=1
    ...

Rows always carry all seven columns; columns a segment kind does not use
are written as zero. ``static_accel pose=K`` holds the accelerometer
capture for pose K (one row per sample), ``rotating pose=K`` the
gyroscope capture while spinning at that pose (its accelerometer columns
hold the spinning accelerometer data, used only by the consistency
analysis). ``static_accel`` segments without a rotating partner are
free-orientation captures for accelerometer pre-calibration. Every
``rotating`` segment must have a matching ``static_accel`` segment.

Floats are written as shortest round-trip decimals, so writing is
byte-deterministic and reading back is lossless. Config files are
``key = value`` lines with ``#`` comments; unknown keys are rejected.
Reports are ``#``-prefixed metadata followed by ``key = value`` lines or
a tab-separated table; report writes are atomic (temp file + rename).
"""

from __future__ import annotations

import dataclasses
import os
import tempfile
from pathlib import Path

import numpy as np

from .calibration import CalibrationSession, PoseObservation, ScaleEstimate
from .sensors import AccelParams, GyroParams
from .simulation import MonteCarloReport, SessionTruth, SimConfig, SyntheticSession

SESSION_MAGIC = "# gyrocal-session 1"
TRUTH_MAGIC = "# gyrocal-truth 1"
CANONICAL_UNITS = "time=s gyro=deg/s accel=m/s^2"
_SEGMENT_KINDS = ("static_gyro", "static_accel", "rotating")


class SessionFormatError(ValueError):
    """A session file violates the format or its invariants."""


class ConfigError(ValueError):
    """A config file has unknown keys, bad types, or invalid values."""


def _fmt(value: float) -> str:
    return repr(float(value))


def _fmt_row(values) -> str:
    return " ".join(_fmt(v) for v in values)


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# session files


@dataclasses.dataclass(frozen=True)
class Segment:
    kind: str  # static_gyro | static_accel | rotating
    pose_id: int | None
    rows: np.ndarray  # (n, 7): t gx gy gz ax ay az

    @property
    def gyro(self) -> np.ndarray:
        return self.rows[:, 1:4]

    @property
    def accel(self) -> np.ndarray:
        return self.rows[:, 4:7]


@dataclasses.dataclass(frozen=True)
class SessionFile:
    rotor_speed: float
    gravity: float
    segments: tuple[Segment, ...]


def load_session_file(path) -> SessionFile:
    """Parse a session log without collapsing it to pose means."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise SessionFormatError(f"{path}: cannot read session file: {exc}") from exc

    if not lines or lines[0].strip() != SESSION_MAGIC:
        raise SessionFormatError(f"{path}:1: not a gyrocal session file (missing magic line)")

    header: dict[str, str] = {}
    body_start = 1
    for number, line in enumerate(lines[1:], start=2):
        if not line.startswith("#"):
            body_start = number
            break
        body_start = number + 1
        key, _, value = line.lstrip("#").strip().partition(":")
        if value:
            header[key.strip()] = value.strip()

    units = header.get("units")
    if units != CANONICAL_UNITS:
        raise SessionFormatError(
            f"{path}: unknown units {units!r}; this reader expects '{CANONICAL_UNITS}'"
        )
    try:
        rotor_speed = float(header["rotor_speed"])
        gravity = float(header["gravity"])
    except KeyError as exc:
        raise SessionFormatError(f"{path}: header is missing {exc.args[0]!r}") from exc
    except ValueError as exc:
        raise SessionFormatError(f"{path}: bad numeric header value: {exc}") from exc

    segments: list[tuple[str, int | None, list, int]] = []
    for number, raw in enumerate(lines[body_start - 1 :], start=body_start):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("@"):
            fields = line[1:].split()
            kind = fields[0]
            if kind not in _SEGMENT_KINDS:
                raise SessionFormatError(f"{path}:{number}: unknown segment kind {kind!r}")
            pose_id: int | None = None
            if len(fields) > 1:
                name, _, value = fields[1].partition("=")
                if name != "pose" or not value:
                    raise SessionFormatError(
                        f"{path}:{number}: expected 'pose=<id>', got {fields[1]!r}"
                    )
                try:
                    pose_id = int(value)
                except ValueError:
                    raise SessionFormatError(
                        f"{path}:{number}: pose id must be an integer, got {value!r}"
                    ) from None
            if kind != "static_gyro" and pose_id is None:
                raise SessionFormatError(f"{path}:{number}: {kind} segment requires a pose id")
            segments.append((kind, pose_id, [], number))
            continue
        if not segments:
            raise SessionFormatError(f"{path}:{number}: data row before any segment header")
        parts = line.split()
        if len(parts) != 7:
            raise SessionFormatError(
                f"{path}:{number}: expected 7 columns (t gx gy gz ax ay az), got {len(parts)}"
            )
        try:
            row = [float(p) for p in parts]
        except ValueError:
            raise SessionFormatError(f"{path}:{number}: malformed numeric row") from None
        rows = segments[-1][2]
        if rows and row[0] < rows[-1][0]:
            raise SessionFormatError(
                f"{path}:{number}: timestamps must be non-decreasing within a segment"
            )
        rows.append(row)

    parsed = []
    for kind, pose_id, rows, number in segments:
        if not rows:
            raise SessionFormatError(f"{path}:{number}: segment {kind} has no rows")
        parsed.append(Segment(kind=kind, pose_id=pose_id, rows=np.array(rows)))
    rotating_ids = {s.pose_id for s in parsed if s.kind == "rotating"}
    static_ids = {s.pose_id for s in parsed if s.kind == "static_accel"}
    missing = sorted(rotating_ids - static_ids)
    if missing:
        raise SessionFormatError(
            f"{path}: rotating segment for pose {missing[0]} has no matching static_accel segment"
        )
    return SessionFile(rotor_speed=rotor_speed, gravity=gravity, segments=tuple(parsed))


def read_session(path, per_sample_rows: bool = False) -> CalibrationSession:
    """Collapse a session log to pose observations plus static samples.

    With ``per_sample_rows`` each rotating sample becomes its own
    observation (paired with its pose's static accelerometer mean)
    instead of averaging per pose.
    """
    session_file = load_session_file(path)
    static_gyro_rows = [s.gyro for s in session_file.segments if s.kind == "static_gyro"]
    if not static_gyro_rows:
        raise SessionFormatError(f"{path}: session has no static_gyro segment")
    static_gyro = np.vstack(static_gyro_rows)

    accel_by_pose: dict[int, list[np.ndarray]] = {}
    gyro_by_pose: dict[int, list[np.ndarray]] = {}
    for segment in session_file.segments:
        if segment.kind == "static_accel":
            accel_by_pose.setdefault(segment.pose_id, []).append(segment.accel)
        elif segment.kind == "rotating":
            gyro_by_pose.setdefault(segment.pose_id, []).append(segment.gyro)

    poses = []
    for pose_id in sorted(gyro_by_pose):
        accel_rows = np.vstack(accel_by_pose[pose_id])
        gyro_rows = np.vstack(gyro_by_pose[pose_id])
        accel_mean = accel_rows.mean(axis=0)
        if per_sample_rows:
            for row in gyro_rows:
                poses.append(PoseObservation(accel_mean=accel_mean, gyro_mean=row, sample_count=1))
        else:
            poses.append(
                PoseObservation(
                    accel_mean=accel_mean,
                    gyro_mean=gyro_rows.mean(axis=0),
                    sample_count=gyro_rows.shape[0],
                )
            )
    free_ids = sorted(set(accel_by_pose) - set(gyro_by_pose))
    accel_cal_means = tuple(
        np.vstack(accel_by_pose[pose_id]).mean(axis=0) for pose_id in free_ids
    )
    return CalibrationSession(
        poses=tuple(poses),
        rotor_speed=session_file.rotor_speed,
        static_gyro=static_gyro,
        gravity=session_file.gravity,
        accel_cal_means=accel_cal_means,
    )


def _session_text(session: CalibrationSession) -> str:
    if session.static_gyro.shape[0] == 0:
        raise ValueError("cannot write a session with empty static gyroscope data")
    lines = [
        SESSION_MAGIC,
        f"# units: {CANONICAL_UNITS}",
        f"# rotor_speed: {_fmt(session.rotor_speed)}",
        f"# gravity: {_fmt(session.gravity)}",
        "@static_gyro",
    ]
    for i, row in enumerate(session.static_gyro):
        lines.append(_fmt_row([i * 0.01, row[0], row[1], row[2], 0.0, 0.0, 0.0]))
    for pose_id, pose in enumerate(session.poses, start=1):
        a, g = pose.accel_mean, pose.gyro_mean
        lines.append(f"@static_accel pose={pose_id}")
        lines.append(_fmt_row([0.0, 0.0, 0.0, 0.0, a[0], a[1], a[2]]))
        lines.append(f"@rotating pose={pose_id}")
        lines.append(_fmt_row([0.0, g[0], g[1], g[2], a[0], a[1], a[2]]))
    next_id = len(session.poses) + 1
    for offset, accel in enumerate(session.accel_cal_means):
        lines.append(f"@static_accel pose={next_id + offset}")
        lines.append(_fmt_row([0.0, 0.0, 0.0, 0.0, accel[0], accel[1], accel[2]]))
    return "\n".join(lines) + "\n"


def write_session(session, path) -> None:
    """Write a session (or a synthetic session plus truth sidecar).

    Output is byte-identical for identical input. For a
    :class:`SyntheticSession` the ground truth goes to ``<path>.truth``
    so that plain session reads can never see it.
    """
    path = Path(path)
    if isinstance(session, SyntheticSession):
        _atomic_write(path, _session_text(session.session))
        _atomic_write(Path(str(path) + ".truth"), _truth_text(session.truth))
    else:
        _atomic_write(path, _session_text(session))


def write_session_file(session_file: SessionFile, path) -> None:
    """Write raw per-sample segments (inverse of :func:`load_session_file`)."""
    lines = [
        SESSION_MAGIC,
        f"# units: {CANONICAL_UNITS}",
        f"# rotor_speed: {_fmt(session_file.rotor_speed)}",
        f"# gravity: {_fmt(session_file.gravity)}",
    ]
    for segment in session_file.segments:
        if segment.kind == "static_gyro":
            lines.append("@static_gyro")
        else:
            lines.append(f"@{segment.kind} pose={segment.pose_id}")
        lines.extend(_fmt_row(row) for row in segment.rows)
    _atomic_write(path, "\n".join(lines) + "\n")


def _truth_text(truth: SessionTruth) -> str:
    lines = [
        TRUTH_MAGIC,
        f"gyro_scale = {_fmt_row(truth.gyro.scale)}",
        f"gyro_bias = {_fmt_row(truth.gyro.bias)}",
        f"accel_scale = {_fmt_row(truth.accel.scale)}",
        f"accel_bias = {_fmt_row(truth.accel.bias)}",
        f"axis = {_fmt_row(truth.axis)}",
        f"dot_constant = {_fmt(truth.dot_constant)}",
    ]
    return "\n".join(lines) + "\n"


def read_truth_sidecar(path) -> SessionTruth:
    values = _read_key_values(path, magic=TRUTH_MAGIC)
    try:
        return SessionTruth(
            gyro=GyroParams(
                scale=_parse_floats(values["gyro_scale"], 3, "gyro_scale"),
                bias=_parse_floats(values["gyro_bias"], 3, "gyro_bias"),
            ),
            accel=AccelParams(
                scale=_parse_floats(values["accel_scale"], 3, "accel_scale"),
                bias=_parse_floats(values["accel_bias"], 3, "accel_bias"),
            ),
            axis=_parse_floats(values["axis"], 3, "axis"),
            dot_constant=float(values["dot_constant"]),
            gravity_dirs=(),
        )
    except KeyError as exc:
        raise SessionFormatError(f"{path}: truth sidecar is missing {exc.args[0]!r}") from exc


# ---------------------------------------------------------------------------
# key=value parsing (configs, sidecars, parameter files)


def _read_key_values(path, magic: str | None = None) -> dict[str, str]:
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read file: {exc}") from exc
    if magic is not None and (not lines or lines[0].strip() != magic):
        raise ConfigError(f"{path}: expected first line {magic!r}")
    values: dict[str, str] = {}
    for number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        if not eq:
            raise ConfigError(f"{path}:{number}: expected 'key = value', got {raw.strip()!r}")
        values[key.strip()] = value.strip()
    return values


def _parse_floats(text: str, count: int, key: str) -> np.ndarray:
    parts = text.split()
    if len(parts) != count:
        raise ConfigError(f"key '{key}': expected {count} numbers, got {text!r}")
    try:
        return np.array([float(p) for p in parts])
    except ValueError:
        raise ConfigError(f"key '{key}': expected numbers, got {text!r}") from None


def _parse_float(text: str, key: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"key '{key}': expected a number, got {text!r}") from None


def _parse_int(text: str, key: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"key '{key}': expected an integer, got {text!r}") from None


def _parse_bool(text: str, key: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"key '{key}': expected a boolean, got {text!r}")


def _parse_range(text: str, key: str):
    if text.lower() in ("none", "ideal"):
        return None
    values = _parse_floats(text, 2, key)
    return (float(values[0]), float(values[1]))


def _parse_triple(text: str, key: str):
    if text.lower() == "none":
        return None
    values = _parse_floats(text, 3, key)
    return (float(values[0]), float(values[1]), float(values[2]))


@dataclasses.dataclass(frozen=True)
class CalibrationOptions:
    """Options consumed by the calibrate command."""

    accel_cal: str = "identity"  # identity | fit | <params file>
    condition_limit: float = 1e8
    per_sample_rows: bool = False


_SIM_KEYS = {
    "gyro_scale_range": _parse_range,
    "gyro_bias_range": _parse_range,
    "gyro_scale_fixed": _parse_triple,
    "gyro_bias_fixed": _parse_triple,
    "accel_noise_sigma": _parse_float,
    "rotor_speed": _parse_float,
    "rotor_noise_fraction": _parse_float,
    "gyro_noise_sigma": _parse_float,
    "accel_scale_range": _parse_range,
    "accel_bias_range": _parse_range,
    "pose_count": _parse_int,
    "rotating_sample_count": _parse_int,
    "static_sample_count": _parse_int,
    "accel_cal_pose_count": _parse_int,
    "lever_arm": _parse_triple,
    "axis_fixed": _parse_triple,
    "tilt_cos_fixed": _parse_float,
    "gravity": _parse_float,
    "seed": _parse_int,
}

_CALIBRATION_KEYS = {
    "accel_cal": lambda text, key: text,
    "condition_limit": _parse_float,
    "per_sample_rows": _parse_bool,
}


def read_config(path) -> SimConfig | CalibrationOptions:
    """Read a config file; ``kind = calibration`` selects calibration
    options, anything else (including an empty file) is a simulation
    config with defaults for unset keys."""
    values = _read_key_values(path)
    kind = values.pop("kind", "simulation")
    if kind == "calibration":
        table, target = _CALIBRATION_KEYS, CalibrationOptions
    elif kind == "simulation":
        table, target = _SIM_KEYS, SimConfig
    else:
        raise ConfigError(f"{path}: unknown config kind {kind!r}")
    kwargs = {}
    for key, text in values.items():
        if key not in table:
            raise ConfigError(f"{path}: unknown config key '{key}'")
        kwargs[key] = table[key](text, key)
    try:
        return target(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def read_gyro_params(path) -> GyroParams:
    """Read gyroscope scale and bias from a parameter file or a
    calibrate report."""
    values = _read_key_values(path)
    for key in ("scale", "bias"):
        if key not in values:
            raise ConfigError(f"{path}: missing key '{key}'")
    return GyroParams(
        scale=_parse_floats(values["scale"], 3, "scale"),
        bias=_parse_floats(values["bias"], 3, "bias"),
    )


def read_accel_params(path) -> AccelParams:
    values = _read_key_values(path)
    for key in ("scale", "bias"):
        if key not in values:
            raise ConfigError(f"{path}: missing key '{key}'")
    return AccelParams(
        scale=_parse_floats(values["scale"], 3, "scale"),
        bias=_parse_floats(values["bias"], 3, "bias"),
    )


# ---------------------------------------------------------------------------
# reports


def _report_header(kind: str, metadata: dict[str, str]) -> list[str]:
    lines = [f"# gyrocal-report {kind} 1"]
    lines.extend(f"# {key}: {value}" for key, value in metadata.items())
    return lines


def write_calibrate_report(path, estimate: ScaleEstimate, metadata: dict[str, str]) -> None:
    d = estimate.diagnostics
    lines = _report_header("calibrate", metadata)
    lines += [
        f"scale = {_fmt_row(estimate.scale)}",
        f"bias = {_fmt_row(estimate.bias)}",
        f"scale_ratios = {_fmt_row(estimate.scale_ratios)}",
        f"dot_constant = {_fmt(estimate.dot_constant)}",
        f"static_mean = {_fmt_row(estimate.static_mean)}",
        f"residual_norm = {_fmt(d.residual_norm)}",
        f"normal_eq_residual = {_fmt(d.normal_eq_residual)}",
        f"condition_number = {_fmt(d.condition_number)}",
        f"dots_uncalibrated = {_fmt_row(d.dots_uncalibrated)}",
        f"dots_calibrated = {_fmt_row(d.dots_calibrated)}",
    ]
    _atomic_write(path, "\n".join(lines) + "\n")


MC_REPORT_COLUMNS = ("axis", "noise_sigma", "mean", "variance", "excess_kurtosis", "skewness", "runs", "failures")


def write_montecarlo_report(path, reports: list[MonteCarloReport], metadata: dict[str, str]) -> None:
    """Tab-separated table: one row per (axis, noise level)."""
    lines = _report_header("montecarlo", metadata)
    lines.append("\t".join(MC_REPORT_COLUMNS))
    for report in reports:
        for axis, stats in zip("xyz", report.scale_stats):
            lines.append(
                "\t".join(
                    [
                        axis,
                        _fmt(report.gyro_noise_sigma),
                        _fmt(stats.mean),
                        _fmt(stats.variance),
                        _fmt(stats.excess_kurtosis),
                        _fmt(stats.skewness),
                        str(report.runs),
                        str(report.failures),
                    ]
                )
            )
    _atomic_write(path, "\n".join(lines) + "\n")


def write_key_value_report(path, kind: str, metadata: dict[str, str], values: dict[str, str]) -> None:
    lines = _report_header(kind, metadata)
    lines.extend(f"{key} = {value}" for key, value in values.items())
    _atomic_write(path, "\n".join(lines) + "\n")
