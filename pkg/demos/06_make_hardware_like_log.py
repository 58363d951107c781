#!/usr/bin/env python3
"""Build (and replay) the committed hardware-like session log.

Live serial acquisition is out of scope, so the repository ships a
synthetic log shaped like a real capture from a consumer IMU on a hobby
servo: per-sample rows, per-axis noise floors matching levels measured
on an LSM9DS1-class unit during uniform rotation (gyro means around
(10.0, 2.9, -16.6) deg/s with variances 0.027/0.011/0.060), six static
poses, and a plausible hidden truth. Running this script regenerates
``data/hardware_like_session.txt`` byte-for-byte and then calibrates it.

Usage: python3 demos/06_make_hardware_like_log.py [out_path]
"""

import sys
from pathlib import Path

import numpy as np

from gyrocal import calibrate_gyroscope, dot_product_series
from gyrocal.dataio import Segment, SessionFile, read_session, write_session_file

OUT = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("data/hardware_like_session.txt")

# measured raw levels during uniform rotation (deg/s; variance per sample)
RAW_MEAN = np.array([10.002, 2.942, -16.613])
RAW_VARIANCE = np.array([0.027, 0.011, 0.060])

# hidden truth for the synthetic device
SCALE = np.array([1.08, 0.92, 1.15])
BIAS = np.array([0.4, -0.3, 0.6])  # deg/s
TILT_COS = 0.45
GRAVITY = 9.80665
POSES = 6
ROT_SAMPLES = 500
STATIC_SAMPLES = 800
ACCEL_SAMPLES = 200
ACCEL_NOISE = 0.004  # m/s^2 per sample
RATE_HZ = 100.0

rng = np.random.default_rng(20250612)

# geometry implied by the raw levels: true rate = scale * raw_mean + bias
rate_true = SCALE * RAW_MEAN + BIAS
rotor_speed = float(np.linalg.norm(rate_true))
axis = rate_true / rotor_speed
helper = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
e1 = np.cross(axis, helper)
e1 /= np.linalg.norm(e1)
e2 = np.cross(axis, e1)
sin_tilt = np.sqrt(1.0 - TILT_COS**2)

raw_sigma = np.sqrt(RAW_VARIANCE)
static_level = -BIAS / SCALE


def timestamps(n):
    return np.arange(n) / RATE_HZ


def rows(t, gyro, accel):
    return np.column_stack([t, gyro, accel])


segments = []
static_gyro = static_level + rng.standard_normal((STATIC_SAMPLES, 3)) * raw_sigma
segments.append(
    Segment(
        kind="static_gyro",
        pose_id=None,
        rows=rows(timestamps(STATIC_SAMPLES), static_gyro, np.zeros((STATIC_SAMPLES, 3))),
    )
)

pose_angles = (np.arange(POSES) + rng.random(POSES)) * (2.0 * np.pi / POSES)
for pose_id, angle in enumerate(pose_angles, start=1):
    gravity_dir = TILT_COS * axis + sin_tilt * (np.cos(angle) * e1 + np.sin(angle) * e2)
    accel = GRAVITY * gravity_dir + rng.standard_normal((ACCEL_SAMPLES, 3)) * ACCEL_NOISE
    segments.append(
        Segment(
            kind="static_accel",
            pose_id=pose_id,
            rows=rows(timestamps(ACCEL_SAMPLES), np.zeros((ACCEL_SAMPLES, 3)), accel),
        )
    )
    gyro = RAW_MEAN + rng.standard_normal((ROT_SAMPLES, 3)) * raw_sigma
    spinning_accel = GRAVITY * np.stack(
        [
            TILT_COS * axis
            + sin_tilt * (np.cos(angle + phi) * e1 + np.sin(angle + phi) * e2)
            for phi in 2.0 * np.pi * np.arange(ROT_SAMPLES) / ROT_SAMPLES
        ]
    ) + rng.standard_normal((ROT_SAMPLES, 3)) * ACCEL_NOISE
    segments.append(
        Segment(
            kind="rotating",
            pose_id=pose_id,
            rows=rows(timestamps(ROT_SAMPLES), gyro, spinning_accel),
        )
    )

OUT.parent.mkdir(parents=True, exist_ok=True)
write_session_file(
    SessionFile(rotor_speed=rotor_speed, gravity=GRAVITY, segments=tuple(segments)), OUT
)
print(f"wrote {OUT} ({OUT.stat().st_size} bytes, rotor speed {rotor_speed:.4f} deg/s)")
print()

# replay: calibrate the file as if it came off the wire
session = read_session(OUT)
estimate = calibrate_gyroscope(session)
print("recovered scale:", np.round(estimate.scale, 4), " (device truth", SCALE, ")")
print("recovered bias: ", np.round(estimate.bias, 4), " (device truth", BIAS, ")")

accel = [p.accel_mean / session.gravity for p in session.poses]
corrected = [p.gyro_mean - estimate.static_mean for p in session.poses]
before = dot_product_series(accel, corrected, label="uncalibrated")
after = dot_product_series(accel, [estimate.scale * g for g in corrected], label="calibrated")
var_before = before.values.var(ddof=1)
var_after = after.values.var(ddof=1)
print()
print(f"dot-product variance before: {var_before:.6e}")
print(f"dot-product variance after:  {var_after:.6e}")
print(f"reduction: {var_before / var_after:.0f}x")
