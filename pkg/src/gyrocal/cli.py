"""Command-line interface.

Subcommands: ``simulate`` (write synthetic session files), ``calibrate``
(estimate scale factors and bias from a session file), ``montecarlo``
(repeat simulate+calibrate batteries and tabulate the estimate
distributions), ``analyze`` (dot-product consistency report for a
session under given parameters).

Exit codes: 0 success, 1 I/O error, 2 config/usage error, 3 degenerate
geometry or calibration failure. ``GYROCAL_SEED`` provides a default
seed; explicit flags win over config file values.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import dataio
from .calibration import (
    CalibrationError,
    DegenerateGeometryError,
    calibrate_gyroscope,
    estimate_gyro_bias,
    fit_accel_params,
)
from .sensors import AccelParams
from .simulation import SimConfig, generate_session, run_monte_carlo, with_noise
from .stats import compare_distributions, dot_product_series, summarize

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3


def _default_seed() -> int | None:
    value = os.environ.get("GYROCAL_SEED")
    return int(value) if value else None


def _load_sim_config(path, seed: int | None) -> SimConfig:
    config = dataio.read_config(path)
    if not isinstance(config, SimConfig):
        raise dataio.ConfigError(f"{path}: expected a simulation config, got kind=calibration")
    if seed is None:
        seed = _default_seed()
    if seed is not None:
        config = replace(config, seed=seed)
    return config


def _cmd_simulate(args) -> int:
    config = _load_sim_config(args.config, args.seed)
    out = Path(args.out)
    if args.runs == 1:
        dataio.write_session(generate_session(config), out)
        print(f"wrote {out}")
        return EXIT_OK
    for i in range(args.runs):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=config.seed, spawn_key=(i,)))
        path = out.with_name(f"{out.stem}_{i + 1:03d}{out.suffix}")
        dataio.write_session(generate_session(config, rng), path)
        print(f"wrote {path}")
    return EXIT_OK


def _resolve_accel_params(mode: str, session) -> AccelParams:
    if mode == "identity":
        return AccelParams.identity()
    if mode == "fit":
        if not session.accel_cal_means:
            raise DegenerateGeometryError(
                "session has no free-orientation static captures to fit the accelerometer; "
                "use --accel-cal=identity or provide a parameter file"
            )
        return fit_accel_params(session.accel_cal_means, session.gravity)
    return dataio.read_accel_params(mode)


def _cmd_calibrate(args) -> int:
    options = dataio.CalibrationOptions(accel_cal=args.accel_cal)
    if args.options:
        loaded = dataio.read_config(args.options)
        if not isinstance(loaded, dataio.CalibrationOptions):
            raise dataio.ConfigError(f"{args.options}: expected 'kind = calibration'")
        options = loaded
        if args.accel_cal != "identity":  # flag wins over config
            options = replace(options, accel_cal=args.accel_cal)
    session = dataio.read_session(args.session, per_sample_rows=options.per_sample_rows)
    accel_params = _resolve_accel_params(options.accel_cal, session)
    estimate = calibrate_gyroscope(session, accel_params, condition_limit=options.condition_limit)

    d = estimate.diagnostics
    print(f"scale            = {estimate.scale[0]:.9f} {estimate.scale[1]:.9f} {estimate.scale[2]:.9f}")
    print(f"bias [deg/s]     = {estimate.bias[0]:.9f} {estimate.bias[1]:.9f} {estimate.bias[2]:.9f}")
    print(f"dot constant     = {estimate.dot_constant:.9f} deg/s")
    print(f"residual norm    = {d.residual_norm:.3e}")
    print(f"condition number = {d.condition_number:.3e}")
    print("pose  dot(before)      dot(after)")
    for i, (before, after) in enumerate(zip(d.dots_uncalibrated, d.dots_calibrated), start=1):
        print(f"{i:4d}  {before:14.9f}  {after:14.9f}")
    if args.report:
        dataio.write_calibrate_report(
            args.report, estimate, metadata={"session": str(args.session)}
        )
        print(f"wrote {args.report}")
    return EXIT_OK


def _cmd_montecarlo(args) -> int:
    config = _load_sim_config(args.config, args.seed)
    levels = args.noise_level if args.noise_level else [config.gyro_noise_sigma]
    reports = [
        run_monte_carlo(with_noise(config, sigma), runs=args.runs, workers=args.workers)
        for sigma in levels
    ]
    print("\t".join(dataio.MC_REPORT_COLUMNS))
    for report in reports:
        for axis, stats in zip("xyz", report.scale_stats):
            print(
                f"{axis}\t{report.gyro_noise_sigma!r}\t{stats.mean!r}\t{stats.variance!r}"
                f"\t{stats.excess_kurtosis!r}\t{stats.skewness!r}\t{report.runs}\t{report.failures}"
            )
    if args.out:
        dataio.write_montecarlo_report(
            args.out,
            reports,
            metadata={"runs": str(args.runs), "seed": str(config.seed)},
        )
        print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_analyze(args) -> int:
    session_file = dataio.load_session_file(args.session)
    session = dataio.read_session(args.session)
    params = dataio.read_gyro_params(args.params)
    static_mean = estimate_gyro_bias(session.static_gyro)

    accel = [p.accel_mean / session.gravity for p in session.poses]
    corrected = [p.gyro_mean - static_mean for p in session.poses]
    calibrated = [params.scale * g for g in corrected]
    before = dot_product_series(accel, corrected, label="uncalibrated")
    after = dot_product_series(accel, calibrated, label="calibrated")

    values: dict[str, str] = {}
    for series in (before, after):
        stats = summarize(series.values)
        print(
            f"{series.label:13s} mean={stats.mean:.6f} variance={stats.variance:.6e} "
            f"range={stats.range:.6e}"
        )
        values[f"{series.label}_mean"] = repr(stats.mean)
        values[f"{series.label}_variance"] = repr(stats.variance)
        values[f"{series.label}_range"] = repr(stats.range)
    ratio = compare_distributions(before, after).variance_ratio
    print(f"variance ratio (uncalibrated/calibrated) = {ratio:.3f}")
    values["variance_ratio"] = repr(ratio)

    rotating_rows = [
        (segment.accel, segment.gyro)
        for segment in session_file.segments
        if segment.kind == "rotating"
    ]
    rotating_accel = np.vstack([a for a, _ in rotating_rows]) / session.gravity
    rotating_gyro = np.vstack([g for _, g in rotating_rows]) - static_mean
    rotating = dot_product_series(
        rotating_accel, [params.scale * g for g in rotating_gyro], label="rotating"
    )
    static = dot_product_series(accel, calibrated, label="static")
    comparison = compare_distributions(rotating, static)
    print(
        f"rotating vs static accel dots: mean_diff={comparison.mean_diff:.3e} "
        f"variance_ratio={comparison.variance_ratio:.3f}"
    )
    values["rotating_static_mean_diff"] = repr(comparison.mean_diff)
    values["rotating_static_variance_ratio"] = repr(comparison.variance_ratio)
    for label, quantiles in (("rotating", comparison.quantiles_a), ("static", comparison.quantiles_b)):
        values[f"quantiles_{label}"] = " ".join(repr(v) for v in quantiles.values())

    if args.report:
        dataio.write_key_value_report(
            args.report,
            "analyze",
            metadata={"session": str(args.session), "params": str(args.params)},
            values=values,
        )
        print(f"wrote {args.report}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gyrocal",
        description="Triaxial gyroscope scale-factor and bias calibration toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate synthetic session files")
    p.add_argument("config", help="simulation config file")
    p.add_argument("out", help="output session file path")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--runs", type=int, default=1)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("calibrate", help="calibrate a gyroscope from a session file")
    p.add_argument("session", help="session file")
    p.add_argument(
        "--accel-cal",
        default="identity",
        help="accelerometer pre-calibration: identity, fit, or a parameter file path",
    )
    p.add_argument("--report", default=None, help="write a machine-readable report here")
    p.add_argument("--options", default=None, help="calibration options config file")
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("montecarlo", help="run a simulate+calibrate battery")
    p.add_argument("config", help="simulation config file")
    p.add_argument("--runs", type=int, default=10000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="write the report table here")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument(
        "--noise-level",
        type=float,
        action="append",
        default=None,
        help="gyro noise sigma (repeat for several levels)",
    )
    p.set_defaults(func=_cmd_montecarlo)

    p = sub.add_parser("analyze", help="dot-product consistency report")
    p.add_argument("session", help="session file")
    p.add_argument("params", help="gyro parameter file or calibrate report")
    p.add_argument("--report", default=None, help="write a machine-readable report here")
    p.set_defaults(func=_cmd_analyze)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except dataio.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegenerateGeometryError as exc:
        print(f"degenerate geometry: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except CalibrationError as exc:
        print(f"calibration failed: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except dataio.SessionFormatError as exc:
        print(f"session file error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
