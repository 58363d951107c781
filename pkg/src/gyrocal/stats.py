"""Descriptive statistics and dot-product distribution diagnostics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import stats as _scipy_stats

from .sensors import as_vec3


@dataclass(frozen=True)
class SummaryStats:
    """Mean, unbiased variance, adjusted Fisher-Pearson skewness and
    excess kurtosis (normal -> 0), plus min/max/range.

    Zero-variance input reports skewness and kurtosis as 0 with
    ``degenerate`` set instead of dividing by zero.
    """

    mean: float
    variance: float  # ddof=1
    skewness: float
    excess_kurtosis: float
    min: float
    max: float
    range: float
    n: int
    degenerate: bool = False


def summarize(data) -> SummaryStats:
    values = np.asarray(data, dtype=np.float64).ravel()
    n = values.size
    if n < 2:
        raise ValueError(f"need at least 2 values to summarize, got {n}")
    if not np.all(np.isfinite(values)):
        raise ValueError("data contains non-finite values")
    variance = float(values.var(ddof=1))
    # values identical up to float rounding: moment ratios are meaningless
    degenerate = variance <= (1e-12 * max(1.0, float(np.abs(values).max()))) ** 2
    if degenerate:
        skewness = 0.0
        kurtosis = 0.0
    else:
        # bias-corrected estimators need n >= 3 (skew) / n >= 4 (kurtosis)
        skewness = float(_scipy_stats.skew(values, bias=n < 3))
        kurtosis = float(_scipy_stats.kurtosis(values, fisher=True, bias=n < 4))
    lo, hi = float(values.min()), float(values.max())
    return SummaryStats(
        mean=float(values.mean()),
        variance=variance,
        skewness=skewness,
        excess_kurtosis=kurtosis,
        min=lo,
        max=hi,
        range=hi - lo,
        n=n,
        degenerate=degenerate,
    )


SeriesLabel = Literal["uncalibrated", "calibrated", "rotating", "static"]


@dataclass(frozen=True)
class DotProductSeries:
    values: np.ndarray
    label: SeriesLabel

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).ravel()
        if not np.all(np.isfinite(values)):
            raise ValueError("dot-product series contains non-finite values")
        object.__setattr__(self, "values", values)


def dot_product_series(accel, gyro, label: SeriesLabel = "uncalibrated") -> DotProductSeries:
    """Elementwise dot products of paired accelerometer and gyroscope vectors."""
    accel = list(accel)
    gyro = list(gyro)
    if len(accel) != len(gyro):
        raise ValueError(f"length mismatch: {len(accel)} accel vs {len(gyro)} gyro vectors")
    if not accel:
        raise ValueError("need at least one vector pair")
    a = np.array([as_vec3(v, "accel") for v in accel])
    g = np.array([as_vec3(v, "gyro") for v in gyro])
    return DotProductSeries(values=np.einsum("ij,ij->i", a, g), label=label)


_QUANTILES = (0.05, 0.25, 0.50, 0.75, 0.95)


@dataclass(frozen=True)
class DistributionComparison:
    mean_diff: float  # mean(a) - mean(b)
    variance_ratio: float  # var(a) / var(b); 1.0 when both are zero
    quantiles_a: dict[float, float]
    quantiles_b: dict[float, float]
    label_a: str
    label_b: str


def compare_distributions(a: DotProductSeries, b: DotProductSeries) -> DistributionComparison:
    """Mean difference, variance ratio, and 5/25/50/75/95% quantiles."""
    if a.values.size == 0 or b.values.size == 0:
        raise ValueError("both series must be non-empty")
    var_a = float(a.values.var(ddof=1)) if a.values.size > 1 else 0.0
    var_b = float(b.values.var(ddof=1)) if b.values.size > 1 else 0.0
    if var_a == 0.0 and var_b == 0.0:
        ratio = 1.0
    elif var_b == 0.0:
        ratio = np.inf
    else:
        ratio = var_a / var_b
    return DistributionComparison(
        mean_diff=float(a.values.mean() - b.values.mean()),
        variance_ratio=ratio,
        quantiles_a={q: float(np.quantile(a.values, q)) for q in _QUANTILES},
        quantiles_b={q: float(np.quantile(b.values, q)) for q in _QUANTILES},
        label_a=a.label,
        label_b=b.label,
    )
