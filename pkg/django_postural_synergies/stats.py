"""
Group comparisons: Mann-Whitney U for motor-behaviour counts and pooled-variance t tests for sway metrics.
"""
import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
import pandas as pd
from scipy import stats as distributions

from django_postural_synergies.core.utils import Group
from django_postural_synergies.exceptions import StatsError
from django_postural_synergies.settings import synergy_settings

logger = logging.getLogger(__name__)

MOTOR_METRICS = ("catches", "throws", "score_total", "catch_rate", "throw_rate", "success_rate")
COP_METRICS = ("total_excursion_mm", "rms_cop_mm", "rms_cop_vel_mm_s", "max_ap_mm", "max_ml_mm")


class Method(str, Enum):
    MANN_WHITNEY_U = "mann_whitney_u"
    INDEPENDENT_T = "independent_t"


class Mode(str, Enum):
    EXACT = "exact"
    NORMAL_APPROX = "normal_approx"


class Alternative(str, Enum):
    TWO_SIDED = "two-sided"
    LESS = "less"
    GREATER = "greater"


@dataclass(frozen=True)
class TestResult:
    __test__ = False

    statistic: float
    p_value: float
    effect_size: float
    method: Method
    n1: int
    n2: int
    alternative: Alternative = Alternative.TWO_SIDED
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise StatsError(f"p-value {self.p_value} is outside [0, 1]")

    def as_data(self):
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "effect_size": self.effect_size,
            "method": self.method,
            "n1": self.n1,
            "n2": self.n2,
            "alternative": self.alternative,
            "details": self.details
        }


def _sample(values, name: str) -> np.ndarray:
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        raise StatsError(f"Sample '{name}' is empty")
    if not np.all(np.isfinite(values)):
        raise StatsError(f"Sample '{name}' contains non-finite values")
    return values


def u_statistic(a, b) -> float:
    """U of the first sample, counting ties as one half, from pooled midranks."""
    a, b = _sample(a, "a"), _sample(b, "b")
    ranks = distributions.rankdata(np.concatenate([a, b]))
    return float(ranks[:a.size].sum() - a.size * (a.size + 1) / 2.0)


def _tail_probability(less: float, greater: float, alternative: Alternative) -> float:
    if alternative == Alternative.LESS:
        return less
    if alternative == Alternative.GREATER:
        return greater
    return min(1.0, 2.0 * min(less, greater))


def exact_u_distribution(ranks: np.ndarray, n1: int) -> np.ndarray:
    """U of the first group for every assignment of the pooled midranks to a first group of size n1."""
    offset = n1 * (n1 + 1) / 2.0
    return np.array([ranks[list(chosen)].sum() - offset for chosen in itertools.combinations(range(ranks.size), n1)])


def mann_whitney_u(a, b, mode: str = Mode.EXACT, alternative: str = None) -> TestResult:
    a, b = _sample(a, "a"), _sample(b, "b")
    mode = Mode(mode)
    alternative = Alternative(alternative or synergy_settings.ALTERNATIVE)
    n1, n2 = a.size, b.size
    total = n1 + n2
    ranks = distributions.rankdata(np.concatenate([a, b]))
    u = float(ranks[:n1].sum() - n1 * (n1 + 1) / 2.0)
    mean = n1 * n2 / 2.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    tie_term = float(np.sum(tie_counts ** 3 - tie_counts))
    variance = n1 * n2 / 12.0 * ((total + 1) - tie_term / (total * (total - 1))) if total > 1 else 0.0
    sd = np.sqrt(max(variance, 0.0))
    z = (u - mean) / sd if sd > 0 else 0.0

    if mode == Mode.EXACT and total > synergy_settings.MWU_EXACT_LIMIT:
        logger.warning("Exact Mann-Whitney U needs n1 + n2 <= %d, got %d; using the normal approximation",
                       synergy_settings.MWU_EXACT_LIMIT, total)
        mode = Mode.NORMAL_APPROX
    if mode == Mode.EXACT:
        null = exact_u_distribution(ranks, n1)
        tolerance = 1e-9
        p_value = _tail_probability(
            float(np.mean(null <= u + tolerance)), float(np.mean(null >= u - tolerance)), alternative
        )
    elif sd == 0:
        p_value = 1.0
    else:
        # continuity correction toward the mean
        less = distributions.norm.cdf((u - mean + 0.5) / sd)
        greater = distributions.norm.sf((u - mean - 0.5) / sd)
        p_value = _tail_probability(float(less), float(greater), alternative)
    return TestResult(
        statistic=u,
        p_value=float(min(1.0, max(0.0, p_value))),
        effect_size=float(z ** 2 / total),
        method=Method.MANN_WHITNEY_U,
        n1=n1,
        n2=n2,
        alternative=alternative,
        details={"mode": mode, "z": float(z), "effect_size_convention": "eta_squared = z^2 / (n1 + n2)"}
    )


def independent_t(a, b, alternative: str = None) -> TestResult:
    """Pooled-variance two-sample t test; the effect size is Cohen's d with the pooled standard deviation."""
    a, b = _sample(a, "a"), _sample(b, "b")
    alternative = Alternative(alternative or synergy_settings.ALTERNATIVE)
    n1, n2 = a.size, b.size
    if n1 < 2 or n2 < 2:
        raise StatsError(f"Each sample needs at least 2 values, got {n1} and {n2}")
    df = n1 + n2 - 2
    pooled_variance = ((n1 - 1) * a.var(ddof=1) + (n2 - 1) * b.var(ddof=1)) / df
    if pooled_variance <= 0:
        raise StatsError("Both samples have zero variance")
    pooled_sd = np.sqrt(pooled_variance)
    difference = a.mean() - b.mean()
    t = difference / (pooled_sd * np.sqrt(1.0 / n1 + 1.0 / n2))
    p_value = _tail_probability(
        float(distributions.t.cdf(t, df)), float(distributions.t.sf(t, df)), alternative
    )
    return TestResult(
        statistic=float(t),
        p_value=float(min(1.0, p_value)),
        effect_size=float(difference / pooled_sd),
        method=Method.INDEPENDENT_T,
        n1=n1,
        n2=n2,
        alternative=alternative,
        details={"df": df}
    )


def describe(values) -> dict:
    values = _sample(values, "values")
    q1, median, q3 = np.percentile(values, [25, 50, 75])
    return {
        "n": int(values.size),
        "median": float(median),
        "q1": float(q1),
        "q3": float(q3),
        "iqr": float(q3 - q1),
        "min": float(values.min()),
        "max": float(values.max())
    }


def motor_performance(cohort) -> pd.DataFrame:
    """Catches, throws and summed score per subject over all sessions, failed trials included."""
    rows = []
    for subject in cohort.subjects:
        trials = list(subject.trials(valid_only=False))
        if not trials:
            continue
        catches = sum(trial.outcome.caught for trial in trials)
        throws = sum(trial.outcome.thrown for trial in trials)
        rows.append({
            "subject": subject.subject_id,
            "group": subject.group.value,
            "trials": len(trials),
            "catches": catches,
            "throws": throws,
            "score_total": sum(trial.outcome.score for trial in trials),
            "catch_rate": catches / len(trials),
            "throw_rate": throws / len(trials),
            "success_rate": sum(trial.outcome.caught and trial.outcome.thrown for trial in trials) / len(trials)
        })
    return pd.DataFrame(rows, columns=["subject", "group", "trials"] + list(MOTOR_METRICS))


def compare_groups(table: pd.DataFrame, metric: str, groups: Sequence = (Group.FF, Group.NOFF),
                   method: str = None, alternative: str = None) -> TestResult:
    """
    Compare one metric column between two groups of a per-subject table.

    Motor-behaviour metrics default to Mann-Whitney U and everything else to the independent t test.
    """
    if metric not in table.columns:
        raise StatsError(f"Unknown metric '{metric}'")
    if len(groups) != 2:
        raise StatsError(f"Exactly two groups are compared, got {len(groups)}")
    samples = []
    for group in groups:
        label = getattr(group, "value", group)
        values = table.loc[table["group"] == label, metric].to_numpy(dtype=float)
        if values.size == 0:
            raise StatsError(f"Group '{label}' has no values for '{metric}'")
        samples.append(values)
    method = Method(method or (Method.MANN_WHITNEY_U if metric in MOTOR_METRICS else Method.INDEPENDENT_T))
    if method == Method.MANN_WHITNEY_U:
        result = mann_whitney_u(*samples, alternative=alternative)
    else:
        result = independent_t(*samples, alternative=alternative)
    details = dict(result.details, metric=metric, groups=[getattr(group, "value", group) for group in groups],
                   summaries=[describe(values) for values in samples])
    return TestResult(result.statistic, result.p_value, result.effect_size, result.method, result.n1, result.n2,
                      result.alternative, details)
