import math
import random
import statistics

import pytest

from sfcsym.stats import EmptySamplesError, compute_confidence_interval


def test_constant_samples_degenerate_interval():
    lo, hi = compute_confidence_interval([3.5] * 12, 0.95)
    assert lo == hi == 3.5


def test_single_sample_degenerate_interval():
    assert compute_confidence_interval([42.0], 0.95) == (42.0, 42.0)


def test_empty_samples_error():
    with pytest.raises(EmptySamplesError):
        compute_confidence_interval([], 0.95)


def test_bad_level_rejected():
    with pytest.raises(ValueError):
        compute_confidence_interval([1.0, 2.0], 1.0)


def test_against_tabulated_t_interval():
    # Closed form on {1..10}: mean 5.5, sd sqrt(55/6), t(0.975, df=9) from
    # standard tables.
    samples = [float(x) for x in range(1, 11)]
    t_9 = 2.2621571627409915
    mean = 5.5
    sd = math.sqrt(55 / 6)
    half = t_9 * sd / math.sqrt(10)
    lo, hi = compute_confidence_interval(samples, 0.95)
    assert abs(lo - (mean - half)) <= 1e-9 * abs(mean - half)
    assert abs(hi - (mean + half)) <= 1e-9 * abs(mean + half)


def test_interval_brackets_mean_property():
    rng = random.Random(3)
    for _ in range(100):
        n = rng.randint(1, 40)
        samples = [rng.gauss(0, 10) for _ in range(n)]
        lo, hi = compute_confidence_interval(samples, rng.choice([0.5, 0.9, 0.95, 0.99]))
        mean = statistics.fmean(samples)
        assert lo <= mean <= hi


def test_wider_level_wider_interval():
    rng = random.Random(4)
    samples = [rng.random() for _ in range(20)]
    lo90, hi90 = compute_confidence_interval(samples, 0.90)
    lo99, hi99 = compute_confidence_interval(samples, 0.99)
    assert hi99 - lo99 > hi90 - lo90
