import math

import numpy as np

from imitab.exceptions import InvalidParameter
from imitab.models import TailCheck
from imitab.utils.rng import child_seed, make_rng


def expected_missing_mass(dist: np.ndarray, n: int) -> float:
    """sum_x p(x) (1 - p(x))^n, the expected weight of symbols absent from n draws."""
    if n < 0:
        raise InvalidParameter(f"sample size must be nonnegative, got {n}")
    dist = np.asarray(dist, dtype=float)
    return float(np.sum(dist * (1.0 - dist) ** n))


def missing_mass_sample(dist: np.ndarray, n: int, seed: int) -> float:
    dist = np.asarray(dist, dtype=float)
    counts = make_rng(seed).multinomial(n, dist)
    return float(dist[counts == 0].sum())


def tail_threshold(support_size: int, n: int, delta: float) -> float:
    return 3.0 * math.sqrt(support_size) * math.log(1.0 / delta) / n


def tail_check(dist: np.ndarray, n: int, delta: float, replicates: int, seed: int = 0) -> TailCheck:
    """
    Fraction of replicates whose realized missing mass exceeds its expectation by at
    least 3 sqrt(|X|) log(1/delta) / n; the upper tail should occur at most delta of the time.
    """
    if not 0 < delta <= 0.1:
        raise InvalidParameter(f"delta must lie in (0, 0.1], got {delta}")
    dist = np.asarray(dist, dtype=float)
    threshold = tail_threshold(len(dist), n, delta)
    expected = expected_missing_mass(dist, n)
    samples = np.array([missing_mass_sample(dist, n, child_seed(seed, r)) for r in range(replicates)])
    coverage = float(np.mean(samples - expected >= threshold))
    return TailCheck(threshold=threshold, expected=expected, coverage=coverage, delta=delta)
