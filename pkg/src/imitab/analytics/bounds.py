"""
Closed-form suboptimality bounds with the explicit constants carried by their proofs.

All logarithms are natural. Every calculator raises InvalidParameter outside its
documented range instead of returning a meaningless number.
"""

import math

import numpy as np

from imitab.exceptions import InvalidParameter
from imitab.models import BoundRecord, Min2Check

MIN2_GRID_POINTS = 10_000


def _require_positive(**kwargs: float) -> None:
    for name, v in kwargs.items():
        if not v > 0:
            raise InvalidParameter(f"{name} must be positive, got {v}")


def bound_bc_expected(S: int, H: int, N: int) -> float:
    """min{H, (4/9) S H^2 / N}; 4/9 bounds max_x x(1-x)^N times N."""
    _require_positive(S=S, H=H, N=N)
    return min(float(H), 4.0 / 9.0 * S * H**2 / N)


def bound_bc_highprob(S: int, H: int, N: int, delta: float) -> float:
    """H^2 (4S/(9N) + 3 sqrt(S) log(H/delta) / N), for delta in (0, min{1, H/10}]."""
    _require_positive(S=S, H=H, N=N)
    if not 0 < delta <= min(1.0, H / 10):
        raise InvalidParameter(f"delta must lie in (0, {min(1.0, H / 10)}], got {delta}")
    return H**2 * (4.0 * S / (9.0 * N) + 3.0 * math.sqrt(S) * math.log(H / delta) / N)


def bound_mimic_emp(S: int, H: int, N: int) -> float:
    """min{H, S H^2 ln(N) / N}; the proof chain gives constant 1."""
    _require_positive(S=S, H=H)
    if N <= 1:
        raise InvalidParameter(f"Mimic-Emp bound needs N > 1, got {N}")
    return min(float(H), S * H**2 * math.log(N) / N)


def bound_mimic_md_expected(S: int, H: int, N: int) -> float:
    """2 min{sqrt(8 S H^2 / N), (8/3) S H^1.5 / N}; the factor 2 comes from the L1 reduction."""
    _require_positive(S=S, H=H, N=N)
    return 2.0 * min(math.sqrt(8.0 * S * H**2 / N), 8.0 / 3.0 * S * H**1.5 / N)


def bound_mimic_md_highprob(S: int, H: int, N: int, delta: float) -> float:
    _require_positive(S=S, H=H, N=N)
    if not 0 < delta < min(1.0, H / 5):
        raise InvalidParameter(f"delta must lie in (0, {min(1.0, H / 5)}), got {delta}")
    log_term = math.log(2.0 * S * H / delta)
    return 2.0 * (S * H**1.5 / N) * math.sqrt(1.0 + 3.0 * log_term / math.sqrt(S)) * math.sqrt(log_term)


def bound_lower_no_interaction(S: int, H: int, N: int) -> float:
    """Reference curve min{H, S H^2 / N} of the no-interaction lower bound, no constant."""
    _require_positive(S=S, H=H, N=N)
    return min(float(H), S * H**2 / N)


def bound_lower_known_transition(S: int, H: int, N: int) -> float:
    """Reference curve min{H, S H / N} of the known-transition lower bound, no constant."""
    _require_positive(S=S, H=H, N=N)
    return min(float(H), S * H / N)


def min2_bound(n: int) -> float:
    if n <= 1:
        raise InvalidParameter(f"min2 bound needs n > 1, got {n}")
    return math.log(n) / n


def min2_grid_check(n: int, points: int = MIN2_GRID_POINTS) -> Min2Check:
    """
    Largest min{x, (1-x)^n} over an evenly spaced grid of [0, 1] against max{ln n, 1}/n.

    The ln(n)/n form only holds from n = 3 on: at n = 2 the curves cross at
    (3 - sqrt 5)/2 ~ 0.382 > ln(2)/2, so the check uses the 1/n floor the argument
    actually delivers below n = e.
    """
    bound = max(min2_bound(n), 1.0 / n)
    x = np.linspace(0.0, 1.0, points)
    worst = float(np.max(np.minimum(x, (1.0 - x) ** n)))
    return Min2Check(n=n, bound=bound, worst=worst, passed=worst <= bound)


CAPPED_BOUNDS = {
    "bc_expected": bound_bc_expected,
    "mimic_emp": bound_mimic_emp,
    "lower_no_interaction": bound_lower_no_interaction,
    "lower_known_transition": bound_lower_known_transition,
}


def bound_records(S: int, H: int, N: int, delta: float | None = None) -> list[BoundRecord]:
    """Every calculator that accepts the arguments; out-of-range ones are skipped."""
    inputs = {"S": S, "H": H, "N": N}
    calculators = [
        ("bc_expected", bound_bc_expected, ()),
        ("mimic_emp", bound_mimic_emp, ()),
        ("mimic_md_expected", bound_mimic_md_expected, ()),
        ("lower_no_interaction", bound_lower_no_interaction, ()),
        ("lower_known_transition", bound_lower_known_transition, ()),
    ]
    if delta is not None:
        calculators += [
            ("bc_highprob", bound_bc_highprob, (delta,)),
            ("mimic_md_highprob", bound_mimic_md_highprob, (delta,)),
        ]
    records = []
    for name, calculator, extra in calculators:
        try:
            v = calculator(S, H, N, *extra)
        except InvalidParameter:
            continue
        records.append(BoundRecord(name=name, inputs=inputs | ({"delta": delta} if extra else {}), value=v))
    return records
