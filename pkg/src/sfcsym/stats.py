"""Small statistics helpers for the experiment harness."""

from __future__ import annotations

import math
import statistics
from typing import Sequence

from scipy.stats import t as _student_t


class EmptySamplesError(ValueError):
    pass


def sample_std(samples: Sequence[float]) -> float:
    """Sample standard deviation; 0.0 for a single observation."""
    if len(samples) < 2:
        return 0.0
    return statistics.stdev(samples)


def compute_confidence_interval(
    samples: Sequence[float], level: float = 0.95
) -> tuple[float, float]:
    """Two-sided Student-t interval for the mean.

    A single observation or zero variance yields the degenerate interval
    (mean, mean).
    """
    if not samples:
        raise EmptySamplesError("confidence interval of an empty sample set")
    if not 0.0 < level < 1.0:
        raise ValueError(f"confidence level must be in (0, 1), got {level}")
    mean = statistics.fmean(samples)
    n = len(samples)
    if n == 1:
        return (mean, mean)
    std = sample_std(samples)
    if std == 0.0:
        return (mean, mean)
    quantile = float(_student_t.ppf((1.0 + level) / 2.0, n - 1))
    half = quantile * std / math.sqrt(n)
    return (mean - half, mean + half)
