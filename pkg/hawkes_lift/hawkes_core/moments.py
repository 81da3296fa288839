"""Monte Carlo moment estimates over a batch of paths."""

import math
from dataclasses import asdict, dataclass
from typing import Dict, Sequence

import numpy as np
from scipy.integrate import trapezoid

from hawkes_lift.common.errors import DomainError
from hawkes_lift.common.logging import get_logger
from hawkes_lift.common.montecarlo import mean_and_se

from .path import PathRecord

logger = get_logger(__name__)


@dataclass(frozen=True)
class MomentSummary:
    n_paths: int
    p: float
    sup_abs_x_p: float
    sup_abs_x_p_se: float
    sup_mean_lambda: float
    sup_mean_lambda_se: float
    sup_mean_lambda_sq: float
    sup_mean_lambda_sq_se: float
    long_run_mean_lambda: float
    long_run_mean_lambda_se: float

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


def _sup_of_mean(values: np.ndarray):
    """sup_t of the cross-path mean, with the standard error at the maximiser."""
    means = values.mean(axis=0)
    k = int(np.argmax(means))
    n = values.shape[0]
    se = float(values[:, k].std(ddof=1) / math.sqrt(n)) if n > 1 else float("nan")
    return float(means[k]), se


def estimate_moments(paths: Sequence[PathRecord], p: float = 1.0) -> MomentSummary:
    """E[sup_t |X_t|^p], sup_t E[lambda_t], sup_t E[lambda_t^2] and the long-run mean intensity.

    The long-run mean is the time average of lambda over the second half of the
    horizon, averaged across paths.
    """
    if len(paths) == 0:
        raise DomainError("estimate_moments needs at least one path")
    if p < 1:
        raise DomainError(f"moment order must be >= 1, got {p}")
    grid = paths[0].times
    for path in paths[1:]:
        if len(path.times) != len(grid) or not np.allclose(path.times, grid):
            raise DomainError("all paths must share the same time grid")
    if len(paths) == 1:
        logger.warning("⚠️ Single path: standard errors are not available")

    sup_x = np.array([path.sup_abs_x() ** p for path in paths])
    lam = np.vstack([path.lam for path in paths])
    x_mean, x_se = mean_and_se(sup_x)
    lam_mean, lam_se = _sup_of_mean(lam)
    lam2_mean, lam2_se = _sup_of_mean(lam * lam)

    half = grid >= grid[0] + 0.5 * (grid[-1] - grid[0])
    span = grid[half][-1] - grid[half][0]
    if span > 0:
        averages = trapezoid(lam[:, half], grid[half], axis=1) / span
    else:
        averages = lam[:, -1]
    long_mean, long_se = mean_and_se(averages)

    return MomentSummary(
        n_paths=len(paths),
        p=float(p),
        sup_abs_x_p=x_mean,
        sup_abs_x_p_se=x_se,
        sup_mean_lambda=lam_mean,
        sup_mean_lambda_se=lam_se,
        sup_mean_lambda_sq=lam2_mean,
        sup_mean_lambda_sq_se=lam2_se,
        long_run_mean_lambda=long_mean,
        long_run_mean_lambda_se=long_se,
    )
