"""Value of the log-utility investor for an exponential-sum kernel.

With consumption c = rho the value splits into a deterministic constant and
the discounted expectation of psi_hat along the intensity, which only needs
the lifted intensity simulation.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import trapezoid

from hawkes_lift.common.errors import HorizonTooShortError
from hawkes_lift.common.logging import get_logger
from hawkes_lift.common.montecarlo import mean_and_se, run_seeded
from hawkes_lift.hawkes_core.driver import make_driver
from hawkes_lift.hawkes_core.simulation import ensure_stable
from hawkes_lift.markov_lift.lifted import simulate_lifted

from .market import MarketSpec, consumption_constant, market_model, psi_hat, psi_hat_array, require_expsum

logger = get_logger(__name__)

DEFAULT_TOLERANCE = 1e-3


@dataclass(frozen=True)
class ClosedFormValue:
    v0n: float
    se: float
    tail_bound: float
    constant: float
    integral: float
    n_paths: int


def tail_bound(mkt: MarketSpec, horizon: float) -> float:
    """Bound on the integral of e^{-rho t} psi_hat(lambda_t) beyond ``horizon``.

    psi_hat is convex in the intensity, so its sup over [0, lambda_cap] sits at an end point.
    """
    sup_psi = max(psi_hat(0.0, mkt).value, psi_hat(mkt.lambda_cap, mkt).value)
    return math.exp(-mkt.rho * horizon) * sup_psi / mkt.rho


def needed_horizon(mkt: MarketSpec, tolerance: float) -> float:
    sup_psi = max(psi_hat(0.0, mkt).value, psi_hat(mkt.lambda_cap, mkt).value)
    if sup_psi <= 0:
        return 0.0
    return max(math.log(sup_psi / (mkt.rho * tolerance)) / mkt.rho, 0.0)


def value_closed_form(
    mkt: MarketSpec,
    horizon_trunc: float,
    n_paths: int,
    seed0: int,
    dt: float = 0.01,
    tolerance: float = DEFAULT_TOLERANCE,
    threads: Optional[int] = None,
    allow_unstable: bool = False,
) -> ClosedFormValue:
    """V0 = (1/rho)(log X0 + log rho + r/rho - 1) + integral of e^{-rho t} E[psi_hat(lambda_t)].

    Raises:
        HorizonTooShortError: If the tail beyond ``horizon_trunc`` may exceed ``tolerance``.
    """
    kernel = require_expsum(mkt.kernel)
    bound = tail_bound(mkt, horizon_trunc)
    if bound > tolerance:
        raise HorizonTooShortError(bound, tolerance, needed_horizon(mkt, tolerance))
    constant = consumption_constant(mkt)
    model = market_model(mkt)
    ensure_stable(model, kernel, allow_unstable)

    if kernel.n == 0 or not np.any(kernel.eta):
        # deterministic intensity
        lam = float(mkt.intensity(0.0))
        integral = psi_hat(lam, mkt).value * (1.0 - math.exp(-mkt.rho * horizon_trunc)) / mkt.rho
        return ClosedFormValue(constant + integral, 0.0, bound, constant, integral, n_paths)

    def task(seed: int) -> float:
        driver = make_driver(seed, dt, horizon_trunc, mkt.lambda_cap, model.mark_dist)
        path = simulate_lifted(model, kernel, driver)
        discounted = np.exp(-mkt.rho * path.times) * psi_hat_array(path.lam, mkt).value
        return float(trapezoid(discounted, path.times))

    integrals = run_seeded(task, range(seed0, seed0 + n_paths), threads)
    integral, se = mean_and_se(integrals)
    v0n = constant + integral
    logger.info(f"V0 for kernel '{kernel.name}' (n={kernel.n}): {v0n:.6g} ± {se:.2g}, tail <= {bound:.2g}")
    return ClosedFormValue(v0n, se, bound, constant, integral, n_paths)
