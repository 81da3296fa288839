"""Thinning simulation of the Hawkes jump-diffusion on a shared noise driver.

One engine serves both representations of the excitation: the Volterra sum over
the jump history and the exponential-sum lift. Only the excitation object
differs, so both produce identical acceptance decisions on identical inputs.
"""

from abc import ABC, abstractmethod
from typing import List, Optional, Sequence

import numpy as np

from hawkes_lift.common.errors import DominationViolatedError, NumericError, StabilityError
from hawkes_lift.common.logging import get_logger
from hawkes_lift.common.montecarlo import run_seeded
from hawkes_lift.kernel.base import ExpSumKernel, Kernel

from .driver import NoiseDriver, make_driver
from .model import ModelSpec
from .path import JumpLog, PathRecord

logger = get_logger(__name__)


class Excitation(ABC):
    """The argument u_t of psi, built from accepted jumps strictly before t."""

    def __init__(self):
        self.evaluations = 0

    @abstractmethod
    def value(self, t: float, count: bool = True) -> float:
        """u_t; ``count`` adds the work done to ``evaluations``."""

    @abstractmethod
    def register(self, t: float, increment: float) -> None:
        """Record an accepted jump at t with input b(y) nu(t, X_{t-})."""

    def snapshot(self, t: float) -> Optional[np.ndarray]:
        return None


class VolterraHistory(Excitation):
    """u_t = sum_i phi(t - s_i) c_i, recomputed over the whole history."""

    def __init__(self, kernel: Kernel):
        super().__init__()
        self.kernel = kernel
        self._times = np.empty(64)
        self._inputs = np.empty(64)
        self._size = 0

    def value(self, t, count=True):
        n = self._size
        if n == 0:
            return 0.0
        if count:
            self.evaluations += n
        weights = np.asarray(self.kernel(t - self._times[:n]), dtype=float)
        return float(weights @ self._inputs[:n])

    def register(self, t, increment):
        if self._size == len(self._times):
            self._times = np.resize(self._times, 2 * self._size)
            self._inputs = np.resize(self._inputs, 2 * self._size)
        self._times[self._size] = t
        self._inputs[self._size] = increment
        self._size += 1


def bridge_increment(s: float, t: float, t_end: float, remaining: float, z: float) -> float:
    """W_t - W_s given W_s and the increment ``remaining`` of W over [s, t_end]."""
    span = t_end - s
    if t >= t_end or span <= 0.0:
        return remaining
    tau = t - s
    return tau / span * remaining + np.sqrt(max(tau * (t_end - t) / span, 0.0)) * z


class ThinningEngine:
    """Euler scheme for the diffusion, exact thinning for the jumps.

    Within a grid step the state is advanced by Euler sub-steps from one
    candidate time to the next, so each candidate sees X at its own time. W at a
    candidate time is drawn on the Brownian bridge between the grid values from
    the driver's bridge normals, and the sub-increments of a step add up to its
    grid increment.
    """

    def __init__(self, model: ModelSpec, driver: NoiseDriver, excitation: Excitation):
        self.model = model
        self.driver = driver
        self.excitation = excitation
        self.candidates_evaluated = 0

    def intensity(self, t: float, x: float, count: bool = True) -> float:
        u = self.excitation.value(t, count)
        lam = self.model.lambda_inf(t, x) + self.model.psi(u)
        if not np.isfinite(lam):
            raise NumericError(f"intensity is not finite at t={t:.6g} (x={x:.6g}, u={u:.6g})")
        if lam < 0.0:
            raise NumericError(f"negative intensity {lam:.6g} at t={t:.6g}; psi and lambda_inf must be >= 0")
        if lam > self.driver.lambda_max:
            raise DominationViolatedError(t, lam, self.driver.lambda_max)
        return float(lam)

    def _euler(self, s: float, x: float, h: float, dw: float) -> float:
        if h <= 0.0 and dw == 0.0:
            return x
        x_new = x + self.model.mu(s, x) * h + self.model.sigma(s, x) * dw
        if not np.isfinite(x_new):
            raise NumericError(f"state is not finite after t={s:.6g}; check mu and sigma")
        return x_new

    def run(self, x0: float, k_start: int = 0, k_end: Optional[int] = None) -> PathRecord:
        model, driver = self.model, self.driver
        grid = driver.times
        dw = driver.brownian_increments
        k_end = driver.n_steps if k_end is None else k_end
        size = k_end - k_start + 1

        x_rec = np.empty(size)
        lam_rec = np.empty(size)
        xi_rec: List[Optional[np.ndarray]] = []
        jump_t, jump_y, jump_dx, jump_c, jump_x, jump_idx = [], [], [], [], [], []

        pts_t, pts_theta, pts_y = driver.point_times, driver.point_thetas, driver.point_marks
        bridge = driver.bridge_normals
        j = int(np.searchsorted(pts_t, grid[k_start], side="right"))
        x = float(x0)
        x_rec[0] = x
        lam_rec[0] = self.intensity(grid[k_start], x, count=False)
        xi_rec.append(self.excitation.snapshot(grid[k_start]))

        for k in range(k_start, k_end):
            t_next = grid[k + 1]
            s, remaining = float(grid[k]), float(dw[k])
            while j < len(pts_t) and pts_t[j] <= t_next:
                t = float(pts_t[j])
                dw_sub = bridge_increment(s, t, t_next, remaining, bridge[j])
                x = self._euler(s, x, t - s, dw_sub)
                remaining -= dw_sub
                s = t
                self.candidates_evaluated += 1
                if pts_theta[j] <= self.intensity(t, x):
                    y = float(pts_y[j])
                    c = model.b(y) * model.nu(t, x)
                    dx = y * model.gamma(t, x)
                    if not (np.isfinite(c) and np.isfinite(dx)):
                        raise NumericError(f"jump coefficients not finite at t={t:.6g} (x={x:.6g})")
                    self.excitation.register(t, c)
                    x += dx
                    jump_t.append(t)
                    jump_y.append(y)
                    jump_dx.append(dx)
                    jump_c.append(c)
                    jump_x.append(x)
                    jump_idx.append(j)
                j += 1
            x = self._euler(s, x, t_next - s, remaining)
            x_rec[k + 1 - k_start] = x
            lam_rec[k + 1 - k_start] = self.intensity(t_next, x, count=False)
            xi_rec.append(self.excitation.snapshot(t_next))

        w = np.concatenate([[0.0], np.cumsum(dw)])[k_start : k_end + 1]
        jumps = JumpLog(
            times=np.asarray(jump_t, dtype=float),
            marks=np.asarray(jump_y, dtype=float),
            dx=np.asarray(jump_dx, dtype=float),
            inputs=np.asarray(jump_c, dtype=float),
            x_after=np.asarray(jump_x, dtype=float),
            index=np.asarray(jump_idx, dtype=int),
        )
        xi = None if xi_rec[0] is None else np.vstack(xi_rec)
        return PathRecord(
            times=grid[k_start : k_end + 1].copy(),
            x=x_rec,
            lam=lam_rec,
            w=w,
            jumps=jumps,
            xi=xi,
            seed=driver.seed,
            candidates_evaluated=self.candidates_evaluated,
            kernel_evaluations=self.excitation.evaluations,
        )


def simulate_volterra(model: ModelSpec, kernel: Kernel, driver: NoiseDriver) -> PathRecord:
    """Simulate with the path-dependent intensity, O(#jumps) work per candidate."""
    engine = ThinningEngine(model, driver, VolterraHistory(kernel))
    path = engine.run(model.x0)
    path.kernel_name = kernel.name
    logger.debug(
        f"Volterra path seed={driver.seed}: {path.n_jumps} jumps, "
        f"{path.candidates_evaluated} candidates, {path.kernel_evaluations} kernel evaluations"
    )
    return path


def simulate(model: ModelSpec, kernel: Kernel, driver: NoiseDriver) -> PathRecord:
    """Lifted simulation for exponential sums, Volterra otherwise."""
    if isinstance(kernel, ExpSumKernel):
        from hawkes_lift.markov_lift.lifted import simulate_lifted

        return simulate_lifted(model, kernel, driver)
    return simulate_volterra(model, kernel, driver)


def ensure_stable(model: ModelSpec, kernel: Kernel, allow_unstable: bool = False) -> None:
    """Refuse to simulate when the stability condition verifiably fails."""
    from hawkes_lift.diagnostics.assumptions import Verdict, check_assumptions

    report = check_assumptions(model, kernel)
    if report.stability is Verdict.FAIL:
        if not allow_unstable:
            raise StabilityError(
                f"stability condition fails for model '{model.name}' with kernel '{kernel.name}' "
                f"(L*E b(Y)*||phi||_1 = {report.stability_product:.4g} >= 1); "
                f"set allow_unstable = true to simulate anyway"
            )
        logger.warning(f"⚠️ Simulating '{model.name}' with kernel '{kernel.name}' although the stability check fails")


def simulate_paths(
    model: ModelSpec,
    kernel: Kernel,
    seeds: Sequence[int],
    dt: float,
    horizon: float,
    lambda_max: float,
    threads: Optional[int] = None,
    allow_unstable: bool = False,
) -> List[PathRecord]:
    """Simulate one path per seed, returned in seed order."""
    ensure_stable(model, kernel, allow_unstable)

    def task(seed: int) -> PathRecord:
        return simulate(model, kernel, make_driver(seed, dt, horizon, lambda_max, model.mark_dist))

    paths = run_seeded(task, seeds, threads)
    logger.info(f"Simulated {len(paths)} paths of '{model.name}' with kernel '{kernel.name}'")
    return paths
