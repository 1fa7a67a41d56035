"""
Log-log rate fits of mean suboptimality against one sweep axis, with a percentile
bootstrap over replicates inside each grid point.
"""

from collections import defaultdict
from typing import Literal

import numpy as np
from loguru import logger
from scipy import stats

from imitab.analytics.bounds import CAPPED_BOUNDS
from imitab.exceptions import DegenerateFit, InvalidParameter
from imitab.models import ExperimentResult, RateFit, RatePoint
from imitab.utils.rng import make_rng

MIN_FIT_POINTS = 3


def _is_binding(bound: str, rows: list[ExperimentResult]) -> bool:
    """Whether the named min{H, .} bound sits on its H cap at this grid point."""
    row = rows[0]
    cap = float(row.horizon)
    return CAPPED_BOUNDS[bound](row.num_states, row.horizon, row.num_trajectories) >= cap


def _slopes(log_x: np.ndarray, log_means: np.ndarray) -> np.ndarray:
    """OLS slopes of every row of log_means against log_x."""
    centered_x = log_x - log_x.mean()
    centered_y = log_means - log_means.mean(axis=-1, keepdims=True)
    return (centered_y @ centered_x) / (centered_x @ centered_x)


def fit_rate(
    rows: list[ExperimentResult],
    x_axis: Literal["N", "H", "S"],
    *,
    algo: str | None = None,
    family: str | None = None,
    bound: str | None = None,
    resamples: int = 1000,
    confidence: float = 0.95,
    seed: int = 0,
) -> RateFit:
    """
    :param bound:
        name of a min{H, .} bound calculator; grid points where it is capped at H are
        excluded, since the rate there is flat by construction
    """
    if bound is not None and bound not in CAPPED_BOUNDS:
        raise InvalidParameter(f"bound must be one of {sorted(CAPPED_BOUNDS)}, got {bound!r}")
    groups: dict[int, list[ExperimentResult]] = defaultdict(list)
    for row in rows:
        if row.status != "ok" or row.suboptimality is None:
            continue
        if (algo is not None and row.algo != algo) or (family is not None and row.family != family):
            continue
        groups[row.axis_value(x_axis)].append(row)

    points: list[RatePoint] = []
    samples: list[np.ndarray] = []
    for x in sorted(groups):
        values = np.array([r.suboptimality for r in groups[x]], dtype=float)
        mean = float(values.mean())
        stderr = float(values.std(ddof=1) / np.sqrt(len(values))) if len(values) > 1 else 0.0
        excluded = False
        if mean <= 0:
            logger.warning(f"{x_axis}={x}: mean suboptimality {mean:.3g} is not positive, excluded from the fit")
            excluded = True
        elif bound is not None and _is_binding(bound, groups[x]):
            logger.warning(f"{x_axis}={x}: {bound} is capped at H, excluded from the fit")
            excluded = True
        points.append(RatePoint(x=x, mean=mean, stderr=stderr, count=len(values), excluded=excluded))
        if not excluded:
            samples.append(values)

    used = [p for p in points if not p.excluded]
    if len(used) < MIN_FIT_POINTS:
        raise DegenerateFit(f"need at least {MIN_FIT_POINTS} grid points with positive mean, got {len(used)}")

    log_x = np.log([p.x for p in used])
    regression = stats.linregress(log_x, np.log([p.mean for p in used]))
    slope = float(regression.slope)

    rng = make_rng(seed)
    boot_means = np.stack(
        [values[rng.integers(0, len(values), size=(resamples, len(values)))].mean(axis=1) for values in samples],
        axis=1,
    )
    # resamples where some grid mean collapses to zero have no log-log fit
    boot_means = boot_means[np.all(boot_means > 0, axis=1)]
    boot_slopes = _slopes(log_x, np.log(boot_means)) if len(boot_means) else np.array([slope])
    alpha = (1.0 - confidence) / 2
    ci_low, ci_high = np.quantile(boot_slopes, [alpha, 1.0 - alpha])
    return RateFit(
        x_axis=x_axis,
        slope=slope,
        intercept=float(regression.intercept),
        ci_low=min(float(ci_low), slope),
        ci_high=max(float(ci_high), slope),
        points=tuple(points),
    )


def fit_to_dict(fit: RateFit) -> dict:
    return {
        "x_axis": fit.x_axis,
        "slope": fit.slope,
        "intercept": fit.intercept,
        "ci_low": fit.ci_low,
        "ci_high": fit.ci_high,
        "points": [{"x": p.x, "mean": p.mean, "stderr": p.stderr} for p in fit.points if not p.excluded],
    }
