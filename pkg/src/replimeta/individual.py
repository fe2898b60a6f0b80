"""Consistent per-replication inference: dependent t-tests for
within-subjects designs, independent (Welch or pooled) t-tests otherwise."""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass

from .data import PairedSample
from .numerics import t_quantile, t_sf

__all__ = ["TestResult", "independent_t_test", "paired_t_test", "TWO_SIDED", "ONE_SIDED_GREATER"]

TWO_SIDED = "two_sided"
ONE_SIDED_GREATER = "one_sided_greater"
_P_FLOOR = 1e-300


@dataclass(frozen=True)
class TestResult:
    experiment_id: str
    estimate: float  # mean treatment - control, outcome units
    ci_low: float
    ci_high: float
    p_value: float
    df: float
    sidedness: str
    n: int

    def __post_init__(self):
        if self.sidedness not in (TWO_SIDED, ONE_SIDED_GREATER):
            raise ValueError(f"unknown sidedness {self.sidedness!r}")


def _p_from_t(t: float, df: float, sidedness: str) -> float:
    if sidedness == ONE_SIDED_GREATER:
        p = t_sf(t, df)
    else:
        p = 2.0 * t_sf(abs(t), df)
    return min(1.0, max(p, _P_FLOOR))


def _result(experiment_id, estimate, se, df, sidedness, alpha, n) -> TestResult:
    t = estimate / se
    half = t_quantile(1.0 - alpha / 2.0, df) * se
    return TestResult(experiment_id, estimate, estimate - half, estimate + half,
                      _p_from_t(t, df, sidedness), df, sidedness, n)


def paired_t_test(sample: PairedSample, sidedness: str = TWO_SIDED,
                  alpha: float = 0.05) -> TestResult:
    """Dependent t-test on per-participant differences.

    The one-sided variant tests treatment > control. The confidence interval
    is the central 1-alpha interval regardless of sidedness.
    """
    diffs = list(sample.differences)
    n = len(diffs)
    sd = statistics.stdev(diffs)
    if sd <= 0.0:
        raise ValueError(f"{sample.experiment_id}: differences have zero variance")
    return _result(sample.experiment_id, statistics.fmean(diffs), sd / math.sqrt(n),
                   n - 1, sidedness, alpha, n)


def independent_t_test(control: list[float], treatment: list[float],
                       welch: bool = True, sidedness: str = TWO_SIDED,
                       alpha: float = 0.05, experiment_id: str = "") -> TestResult:
    """Two-sample t-test of treatment minus control.

    welch=True (default) uses the Welch-Satterthwaite degrees of freedom;
    otherwise the pooled-variance test with df = n1 + n2 - 2.
    """
    n_c, n_t = len(control), len(treatment)
    if n_c < 2 or n_t < 2:
        raise ValueError("each arm needs at least 2 observations")
    var_c = statistics.variance(control)
    var_t = statistics.variance(treatment)
    if var_c <= 0.0 and var_t <= 0.0:
        raise ValueError("both arms have zero variance")
    estimate = statistics.fmean(treatment) - statistics.fmean(control)
    if welch:
        a, b = var_c / n_c, var_t / n_t
        se = math.sqrt(a + b)
        df = (a + b) ** 2 / (a * a / (n_c - 1) + b * b / (n_t - 1))
    else:
        pooled = ((n_c - 1) * var_c + (n_t - 1) * var_t) / (n_c + n_t - 2)
        se = math.sqrt(pooled * (1.0 / n_c + 1.0 / n_t))
        df = n_c + n_t - 2
    return _result(experiment_id, estimate, se, df, sidedness, alpha, n_c + n_t)
