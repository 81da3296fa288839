"""Shared noise: Brownian increments on a grid plus a dominated Poisson point cloud."""

import hashlib
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from hawkes_lift.common.errors import DomainError
from hawkes_lift.common.logging import get_logger

from .marks import MarkDistribution, sample_marks

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class NoiseDriver:
    """One realisation of (W, Pi) on [0, horizon] x [0, lambda_max].

    Every simulation run on the same driver sees the same Brownian path and the
    same candidate points, which is what couples runs across kernels.
    ``bridge_normals`` holds one standard normal per candidate; the engine uses
    it to place W at the candidate time on the bridge between grid values.
    """

    seed: int
    dt: float
    horizon: float
    lambda_max: float
    times: np.ndarray
    brownian_increments: np.ndarray
    point_times: np.ndarray
    point_thetas: np.ndarray
    point_marks: np.ndarray
    bridge_normals: np.ndarray

    @property
    def n_steps(self) -> int:
        return len(self.brownian_increments)

    @property
    def n_points(self) -> int:
        return len(self.point_times)

    @property
    def poisson_points(self) -> List[Tuple[float, float, float]]:
        return list(zip(self.point_times.tolist(), self.point_thetas.tolist(), self.point_marks.tolist()))

    def fingerprint(self) -> str:
        digest = hashlib.sha256()
        digest.update(np.array([self.seed, self.dt, self.horizon, self.lambda_max], dtype=float).tobytes())
        for arr in (self.times, self.brownian_increments, self.point_times,
                    self.point_thetas, self.point_marks, self.bridge_normals):
            digest.update(np.ascontiguousarray(arr).tobytes())
        return digest.hexdigest()

    def coarsened(self, factor: int) -> "NoiseDriver":
        """Same Brownian path and points observed on a grid ``factor`` times coarser.

        Values of W between coarse grid times are bridged from the coarse grid,
        so they agree with the fine path only at the coarse grid times.
        """
        if factor < 1 or self.n_steps % factor:
            raise DomainError(f"cannot coarsen {self.n_steps} steps by a factor {factor}")
        if factor == 1:
            return self
        increments = self.brownian_increments.reshape(-1, factor).sum(axis=1)
        return NoiseDriver(
            seed=self.seed,
            dt=self.dt * factor,
            horizon=self.horizon,
            lambda_max=self.lambda_max,
            times=_frozen(self.times[::factor].copy()),
            brownian_increments=_frozen(increments),
            point_times=self.point_times,
            point_thetas=self.point_thetas,
            point_marks=self.point_marks,
            bridge_normals=self.bridge_normals,
        )


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _grid(dt: float, horizon: float) -> np.ndarray:
    n_steps = int(round(horizon / dt))
    if n_steps < 1 or abs(n_steps * dt - horizon) > 1e-9 * max(horizon, 1.0):
        raise DomainError(f"horizon {horizon} is not a whole number of steps dt={dt}")
    times = np.arange(n_steps + 1, dtype=float) * dt
    times[-1] = horizon
    return times


def make_driver(seed: int, dt: float, horizon: float, lambda_max: float, mark_dist: MarkDistribution) -> NoiseDriver:
    """Build the reproducible noise for one path.

    The Brownian path, the Poisson points and the bridge normals use three
    independent child streams of ``SeedSequence(seed)``, so the Brownian path
    does not depend on lambda_max.
    """
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt}")
    if not horizon > 0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    if not lambda_max > 0:
        raise DomainError(f"lambda_max must be positive, got {lambda_max}")
    if seed < 0:
        raise DomainError(f"seed must be a non-negative integer, got {seed}")

    times = _grid(dt, horizon)
    brownian_seq, poisson_seq, bridge_seq = np.random.SeedSequence(int(seed)).spawn(3)
    rng_w = np.random.default_rng(brownian_seq)
    rng_p = np.random.default_rng(poisson_seq)
    rng_b = np.random.default_rng(bridge_seq)

    increments = rng_w.normal(0.0, np.sqrt(np.diff(times)))
    count = int(rng_p.poisson(lambda_max * horizon))
    point_times = np.sort(rng_p.uniform(0.0, horizon, count))
    thetas = rng_p.uniform(0.0, lambda_max, count)
    marks = sample_marks(mark_dist, rng_p, count)
    bridge = rng_b.standard_normal(count)

    logger.debug(f"Driver seed={seed}: {len(increments)} steps, {count} candidate points")
    return NoiseDriver(
        seed=int(seed),
        dt=float(dt),
        horizon=float(horizon),
        lambda_max=float(lambda_max),
        times=_frozen(times),
        brownian_increments=_frozen(increments),
        point_times=_frozen(point_times),
        point_thetas=_frozen(thetas),
        point_marks=_frozen(marks),
        bridge_normals=_frozen(bridge),
    )
