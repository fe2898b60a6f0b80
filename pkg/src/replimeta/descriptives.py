"""Per-replication and participant-characteristic descriptive statistics,
plus the data series behind profile plots."""

from __future__ import annotations

import math
import statistics
import warnings
from dataclasses import dataclass

from .data import (
    CONTROL,
    TREATMENT,
    CovariateTable,
    ORDINAL_COVARIATES,
    Replication,
    ReplicationSet,
    SummaryRow,
    paired_arm_values,
)

__all__ = [
    "AnalysisWarning",
    "CovariateSummary",
    "ProfileSeries",
    "pearson_corr",
    "profile_series_covariates",
    "profile_series_outcomes",
    "summarize_covariates",
    "summarize_replication",
]


class AnalysisWarning(UserWarning):
    """Non-fatal analysis conditions (degenerate inputs, fallbacks)."""


def sample_sd(values: list[float]) -> float:
    """Sample standard deviation (n-1 denominator); 0.0 for a single value."""
    if len(values) < 2:
        return 0.0
    return statistics.stdev(values)


def pearson_corr(x: list[float], y: list[float]) -> float | None:
    """Pearson correlation; None when either input has zero variance."""
    if len(x) != len(y) or len(x) < 2:
        return None
    mx, my = statistics.fmean(x), statistics.fmean(y)
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    if sxx <= 0.0 or syy <= 0.0:
        return None
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    return max(-1.0, min(1.0, sxy / math.sqrt(sxx * syy)))


def summarize_replication(replication: Replication) -> SummaryRow:
    """Per-arm n/mean/sd/median plus the complete-pairs correlation for
    within-subjects designs.

    The correlation uses complete pairs only, consistent with the
    complete-observation rule of the aggregated-data path. When either paired
    arm is constant the correlation is undefined and reported as missing.
    """
    control = replication.arm_values(CONTROL)
    treatment = replication.arm_values(TREATMENT)
    if len(control) < 2 or len(treatment) < 2:
        raise ValueError(f"{replication.experiment_id}: need at least 2 non-missing "
                         f"outcomes per arm")
    corr = None
    if replication.design == "within":
        paired_c, paired_t = paired_arm_values(replication)
        corr = pearson_corr(paired_c, paired_t)
        if corr is None:
            warnings.warn(f"{replication.experiment_id}: paired correlation undefined "
                          f"(constant arm); reported as missing", AnalysisWarning)
    return SummaryRow(
        experiment_id=replication.experiment_id,
        n_control=len(control),
        n_treatment=len(treatment),
        mean_control=statistics.fmean(control),
        sd_control=sample_sd(control),
        mean_treatment=statistics.fmean(treatment),
        sd_treatment=sample_sd(treatment),
        corr=corr,
        design=replication.design,
        median_control=statistics.median(control),
        median_treatment=statistics.median(treatment),
    )


@dataclass(frozen=True)
class CovariateSummary:
    experiment_id: str
    stats: dict[str, tuple[float, float]]  # covariate -> (mean, sd) on the 1..4 scale

    def mean(self, name: str) -> float:
        return self.stats[name][0]

    def sd(self, name: str) -> float:
        return self.stats[name][1]


def summarize_covariates(covariates: CovariateTable) -> list[CovariateSummary]:
    """Mean (sd) of each ordinal covariate per experiment."""
    if not covariates.rows:
        raise ValueError("covariate table is empty")
    summaries = []
    for exp in covariates.experiment_ids():
        rows = covariates.for_experiment(exp)
        if len(rows) < 2:
            warnings.warn(f"{exp}: single covariate row; sd reported as 0", AnalysisWarning)
        stats = {}
        for name in ORDINAL_COVARIATES:
            values = [float(r.values[name]) for r in rows]
            stats[name] = (statistics.fmean(values), sample_sd(values))
        summaries.append(CovariateSummary(exp, stats))
    return summaries


@dataclass(frozen=True)
class ProfileSeries:
    """Per-experiment polyline data over a fixed category axis."""

    label: str
    categories: tuple[str, ...]
    rows: tuple[tuple[str, tuple[float, ...]], ...]  # (experiment_id, y per category)

    def __post_init__(self):
        for exp, ys in self.rows:
            if len(ys) != len(self.categories):
                raise ValueError(f"{exp}: expected one value per category")


def profile_series_covariates(covariates: CovariateTable) -> ProfileSeries:
    summaries = summarize_covariates(covariates)
    rows = tuple(
        (s.experiment_id, tuple(s.mean(name) for name in ORDINAL_COVARIATES))
        for s in summaries
    )
    return ProfileSeries("mean experience", ORDINAL_COVARIATES, rows)


def profile_series_outcomes(dataset: ReplicationSet,
                            arm_labels: tuple[str, str] = (CONTROL, TREATMENT)) -> ProfileSeries:
    rows = []
    for rep in dataset.replications:
        summary = summarize_replication(rep)
        rows.append((rep.experiment_id, (summary.mean_control, summary.mean_treatment)))
    return ProfileSeries(f"mean {dataset.outcome_name}", arm_labels, tuple(rows))
