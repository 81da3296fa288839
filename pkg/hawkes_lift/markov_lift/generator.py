"""Infinitesimal generator of the lifted process and Dynkin-type checks.

The generator is only meaningful for smooth lambda_inf; the builtin models all
use constant baselines.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import trapezoid

from hawkes_lift.common.errors import DomainError, NumericError
from hawkes_lift.common.logging import get_logger
from hawkes_lift.hawkes_core.marks import MarkDistribution
from hawkes_lift.hawkes_core.model import ModelSpec
from hawkes_lift.hawkes_core.path import PathRecord
from hawkes_lift.kernel.base import ExpSumKernel

from .lifted import LiftedState

logger = get_logger(__name__)

FD_STEP = 1e-5

StateFunction = Callable[[float, float, np.ndarray], float]


@dataclass(frozen=True)
class TestFunction:
    """g(t, x, xi) with optional closed-form derivatives.

    Missing derivatives are taken by central finite differences with step 1e-5.
    """

    __test__ = False

    value: StateFunction
    dt: Optional[StateFunction] = None
    dx: Optional[StateFunction] = None
    dxx: Optional[StateFunction] = None
    dxi: Optional[Callable[[float, float, np.ndarray], np.ndarray]] = None
    name: str = "g"

    def __call__(self, t, x, xi) -> float:
        return float(self.value(t, x, xi))

    def d_t(self, t, x, xi) -> float:
        if self.dt is not None:
            return float(self.dt(t, x, xi))
        return (self(t + FD_STEP, x, xi) - self(t - FD_STEP, x, xi)) / (2 * FD_STEP)

    def d_x(self, t, x, xi) -> float:
        if self.dx is not None:
            return float(self.dx(t, x, xi))
        return (self(t, x + FD_STEP, xi) - self(t, x - FD_STEP, xi)) / (2 * FD_STEP)

    def d_xx(self, t, x, xi) -> float:
        if self.dxx is not None:
            return float(self.dxx(t, x, xi))
        return (self(t, x + FD_STEP, xi) - 2 * self(t, x, xi) + self(t, x - FD_STEP, xi)) / FD_STEP**2

    def d_xi(self, t, x, xi) -> np.ndarray:
        if self.dxi is not None:
            return np.asarray(self.dxi(t, x, xi), dtype=float)
        grad = np.empty(len(xi))
        for k in range(len(xi)):
            step = np.zeros(len(xi))
            step[k] = FD_STEP
            grad[k] = (self(t, x, xi + step) - self(t, x, xi - step)) / (2 * FD_STEP)
        return grad


def quadratic_test_function() -> TestFunction:
    """g = x^2 + |xi|^2."""
    return TestFunction(
        value=lambda t, x, xi: x * x + float(np.dot(xi, xi)),
        dt=lambda t, x, xi: 0.0,
        dx=lambda t, x, xi: 2.0 * x,
        dxx=lambda t, x, xi: 2.0,
        dxi=lambda t, x, xi: 2.0 * np.asarray(xi, dtype=float),
        name="quadratic",
    )


def apply_generator(
    model: ModelSpec,
    kernel: ExpSumKernel,
    g: TestFunction,
    state: LiftedState,
    marks: Optional[MarkDistribution] = None,
) -> float:
    """Generator of (t, X, xi) applied to g at ``state``.

    Drift, decay and diffusion terms plus lambda times the mark integral of
    g(t, x + gamma y, xi + nu b(y)) - g(t, x, xi).
    """
    if not isinstance(kernel, ExpSumKernel):
        raise TypeError(f"the generator needs an exponential-sum kernel, got {type(kernel).__name__}")
    t, x, xi = state.t, state.x, np.asarray(state.xi, dtype=float)
    if xi.size != kernel.n:
        raise DomainError(f"state has {xi.size} auxiliary values, kernel has {kernel.n} terms")
    marks = marks or model.mark_dist

    lam = model.lambda_inf(t, x) + model.psi(float(kernel.eta @ xi))
    sigma = model.sigma(t, x)
    result = (
        g.d_t(t, x, xi)
        + model.mu(t, x) * g.d_x(t, x, xi)
        - float(np.dot(kernel.beta * xi, g.d_xi(t, x, xi)))
        + 0.5 * sigma * sigma * g.d_xx(t, x, xi)
    )

    if lam != 0.0:
        base = g(t, x, xi)
        gamma, nu = model.gamma(t, x), model.nu(t, x)
        nodes, weights = marks.quadrature()
        jumps = np.array([g(t, x + gamma * y, xi + nu * model.b(y)) - base for y in nodes])
        integral = float(weights @ jumps)
        if not np.isfinite(integral):
            raise NumericError(f"mark integral of the generator is not finite at t={t:.6g}, x={x:.6g}")
        result += lam * integral
    return float(result)


def dynkin_residuals(
    model: ModelSpec,
    kernel: ExpSumKernel,
    g: TestFunction,
    paths: Sequence[PathRecord],
) -> np.ndarray:
    """Per path g(T) - g(0) - integral of the generator along the grid (trapezoid).

    These have mean zero up to discretisation error.
    """
    if len(paths) == 0:
        raise DomainError("dynkin_residuals needs at least one path")
    out = np.empty(len(paths))
    for i, path in enumerate(paths):
        if path.xi is None:
            raise DomainError("paths must come from the lifted simulator")
        states = [LiftedState(t=t, x=x, xi=xi) for t, x, xi in zip(path.times, path.x, path.xi)]
        generator = np.array([apply_generator(model, kernel, g, s) for s in states])
        start, end = states[0], states[-1]
        out[i] = g(end.t, end.x, end.xi) - g(start.t, start.x, start.xi) - trapezoid(generator, path.times)
    logger.debug(f"Dynkin residuals over {len(paths)} paths: mean {out.mean():.4g}")
    return out
