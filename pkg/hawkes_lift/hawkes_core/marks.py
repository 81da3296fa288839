"""Mark distributions m(dy) for the Poisson points."""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Dict, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import stats

from hawkes_lift.common.errors import ConfigError, DomainError, NumericError

QUADRATURE_ORDER = 64


def _gauss_legendre_on(lo: float, hi: float, pdf: Callable[[np.ndarray], np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes on [lo, hi] with weights w_i * pdf(y_i), normalised to total mass 1."""
    ref_nodes, ref_weights = leggauss(QUADRATURE_ORDER)
    half = 0.5 * (hi - lo)
    nodes = 0.5 * (hi + lo) + half * ref_nodes
    weights = half * ref_weights * pdf(nodes)
    total = weights.sum()
    if not (np.isfinite(total) and total > 0):
        raise NumericError("mark quadrature has no mass on the effective support")
    return nodes, weights / total


class MarkDistribution(ABC):
    """A probability distribution of marks Y."""

    name: str = "marks"

    @abstractmethod
    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw ``size`` marks."""

    @abstractmethod
    def quadrature(self) -> Tuple[np.ndarray, np.ndarray]:
        """Nodes and probability weights representing m(dy)."""

    def expectation(self, func: Callable[[float], float]) -> float:
        """E[func(Y)] by the distribution's quadrature (exact for discrete marks)."""
        nodes, weights = self.quadrature()
        values = np.array([func(float(y)) for y in nodes], dtype=float)
        result = float(weights @ values)
        if not np.isfinite(result):
            raise NumericError(f"E[f(Y)] is not finite for marks '{self.name}'")
        return result


@dataclass(frozen=True)
class PointMass(MarkDistribution):
    value: float = 1.0
    name: str = "point_mass"

    def sample(self, rng, size):
        return np.full(size, float(self.value))

    def quadrature(self):
        return np.array([float(self.value)]), np.array([1.0])


@dataclass(frozen=True)
class ExponentialMarks(MarkDistribution):
    rate: float = 1.0
    name: str = "exponential"

    def __post_init__(self):
        if not self.rate > 0:
            raise DomainError(f"exponential mark rate must be positive, got {self.rate}")

    def sample(self, rng, size):
        return rng.exponential(1.0 / self.rate, size)

    def quadrature(self):
        # beyond 40/rate the density is below e^{-40}
        return _gauss_legendre_on(0.0, 40.0 / self.rate, lambda y: self.rate * np.exp(-self.rate * y))


@dataclass(frozen=True)
class TruncatedNormalMarks(MarkDistribution):
    """Normal(mean, sd) restricted to mean +/- width * sd so that b(Y) stays integrable."""

    mean: float = 0.0
    sd: float = 1.0
    width: float = 6.0
    name: str = "normal"

    def __post_init__(self):
        if not (self.sd > 0 and self.width > 0):
            raise DomainError(f"normal marks need sd > 0 and width > 0, got sd={self.sd}, width={self.width}")

    def sample(self, rng, size):
        return stats.truncnorm.rvs(-self.width, self.width, loc=self.mean, scale=self.sd, size=size, random_state=rng)

    def quadrature(self):
        lo, hi = self.mean - self.width * self.sd, self.mean + self.width * self.sd
        return _gauss_legendre_on(lo, hi, lambda y: stats.norm.pdf(y, loc=self.mean, scale=self.sd))


@dataclass(frozen=True, eq=False)
class EmpiricalMarks(MarkDistribution):
    values: Tuple[float, ...] = (1.0,)
    name: str = "empirical"

    def __post_init__(self):
        if len(self.values) == 0:
            raise DomainError("empirical marks need at least one value")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def sample(self, rng, size):
        return rng.choice(np.asarray(self.values), size=size, replace=True)

    def quadrature(self):
        nodes, counts = np.unique(np.asarray(self.values), return_counts=True)
        return nodes, counts / counts.sum()


MARK_BUILTINS: Dict[str, Callable[..., MarkDistribution]] = {
    "point_mass": PointMass,
    "exponential": ExponentialMarks,
    "normal": TruncatedNormalMarks,
    "empirical": lambda values=(1.0,): EmpiricalMarks(values=tuple(values)),
}


def build_marks(name: str, **params) -> MarkDistribution:
    if name not in MARK_BUILTINS:
        raise ConfigError(f"unknown mark distribution '{name}'. Available: {', '.join(MARK_BUILTINS)}")
    try:
        return MARK_BUILTINS[name](**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for marks '{name}': {exc}")


# mark transforms b(y)
B_BUILTINS: Dict[str, Callable[[float], float]] = {
    "identity": lambda y: y,
    "abs": abs,
    "one": lambda y: 1.0,
}


def build_b(name: str) -> Callable[[float], float]:
    if name not in B_BUILTINS:
        raise ConfigError(f"unknown mark transform '{name}'. Available: {', '.join(B_BUILTINS)}")
    return B_BUILTINS[name]


def sample_marks(dist: MarkDistribution, rng: np.random.Generator, size: int) -> np.ndarray:
    values = np.asarray(dist.sample(rng, size), dtype=float)
    return values.reshape(size)


__all__ = [
    "MarkDistribution",
    "PointMass",
    "ExponentialMarks",
    "TruncatedNormalMarks",
    "EmpiricalMarks",
    "build_marks",
    "build_b",
    "sample_marks",
]
