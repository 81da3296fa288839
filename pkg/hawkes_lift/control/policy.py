"""Policy-simulation oracle: controlled log-wealth under the market's jumps."""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import trapezoid

from hawkes_lift.common.errors import DomainError, NumericError
from hawkes_lift.common.logging import get_logger
from hawkes_lift.common.montecarlo import mean_and_se, run_seeded
from hawkes_lift.hawkes_core.driver import make_driver
from hawkes_lift.hawkes_core.simulation import simulate

from .market import MarketSpec, market_model, psi_hat_array

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class PolicyState:
    """Grid values seen by a Markov policy; ``xi`` is None for Volterra runs."""

    t: np.ndarray
    lam: np.ndarray
    xi: Optional[np.ndarray] = None


@dataclass(frozen=True, eq=False)
class Policy:
    """Consumption rate c and risky fraction omega as functions of the state on the grid."""

    name: str
    consumption: Callable[[PolicyState], np.ndarray]
    fraction: Callable[[PolicyState], np.ndarray]

    def controls(self, state: PolicyState):
        shape = state.t.shape
        c = np.broadcast_to(np.asarray(self.consumption(state), dtype=float), shape)
        omega = np.broadcast_to(np.asarray(self.fraction(state), dtype=float), shape)
        if np.any(c <= 0):
            raise DomainError(f"policy '{self.name}' proposes a non-positive consumption rate")
        if np.any((omega < 0) | (omega > 1)):
            raise DomainError(f"policy '{self.name}' proposes a fraction outside [0, 1]")
        return c, omega


def optimal_policy(mkt: MarketSpec) -> Policy:
    return Policy(
        name="optimal",
        consumption=lambda s: np.full(s.t.shape, mkt.rho),
        fraction=lambda s: psi_hat_array(s.lam, mkt).omega,
    )


def constant_policy(c: float, omega: float) -> Policy:
    return Policy(name=f"constant(c={c:g}, omega={omega:g})", consumption=lambda s: c, fraction=lambda s: omega)


@dataclass(frozen=True)
class SimulatedValue:
    value: float
    se: float
    truncated: float
    tail_estimate: float
    n_paths: int


def policy_simulation_value(
    mkt: MarketSpec,
    policy: Policy,
    horizon_trunc: float,
    n_paths: int,
    seed0: int,
    dt: float = 0.01,
    threads: Optional[int] = None,
) -> SimulatedValue:
    """E[integral of e^{-rho t} log(c_t X_t) dt] by simulating the controlled wealth.

    Log-wealth moves by (r + (mu-r) omega - c - sigma^2 omega^2/2) dt + sigma omega dW
    on each grid step and by log(1 + gamma omega) at every market jump, with the
    controls frozen at the start of the step. The discounted utility is integrated
    by the trapezoid rule; beyond the horizon it is extrapolated with the final
    expected growth rate.
    """
    model = market_model(mkt)
    a, s2, g, rho = mkt.excess_return, mkt.sigma**2, mkt.gamma_jump, mkt.rho

    def task(seed: int):
        driver = make_driver(seed, dt, horizon_trunc, mkt.lambda_cap, model.mark_dist)
        path = simulate(model, mkt.kernel, driver)
        times = path.times
        c, omega = policy.controls(PolicyState(t=times, lam=path.lam, xi=path.xi))
        if np.any(1.0 + g * omega <= 0):
            raise NumericError(f"wealth would become non-positive (gamma_jump={g})")
        steps = np.diff(times)
        drift = (mkt.r + a * omega[:-1] - c[:-1] - 0.5 * s2 * omega[:-1] ** 2) * steps
        diffusion = mkt.sigma * omega[:-1] * driver.brownian_increments
        # jumps in (t_k, t_{k+1}] use the controls of step k
        step_of_jump = np.searchsorted(times, path.jumps.times, side="left") - 1
        jump_terms = np.zeros(len(steps))
        np.add.at(jump_terms, step_of_jump, np.log1p(g * omega[step_of_jump]))
        log_wealth = math.log(mkt.x0_wealth) + np.concatenate([[0.0], np.cumsum(drift + diffusion + jump_terms)])
        if not np.all(np.isfinite(log_wealth)):
            raise NumericError(f"log-wealth is not finite on seed {seed}")

        utility = np.exp(-rho * times) * (np.log(c) + log_wealth)
        truncated = float(trapezoid(utility, times))
        growth = mkt.r + a * omega[-1] - c[-1] - 0.5 * s2 * omega[-1] ** 2 + path.lam[-1] * math.log1p(g * omega[-1])
        tail = math.exp(-rho * times[-1]) * ((math.log(c[-1]) + log_wealth[-1]) / rho + growth / rho**2)
        return truncated, tail

    results = run_seeded(task, range(seed0, seed0 + n_paths), threads)
    totals = [trunc + tail for trunc, tail in results]
    value, se = mean_and_se(totals)
    truncated = float(np.mean([trunc for trunc, _ in results]))
    tail = float(np.mean([t for _, t in results]))
    logger.info(f"Policy '{policy.name}': value {value:.6g} ± {se:.2g} (tail estimate {tail:.2g})")
    return SimulatedValue(value=value, se=se, truncated=truncated, tail_estimate=tail, n_paths=n_paths)
