"""Memory kernels: general scalar functions and explicit sums of exponentials."""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from hawkes_lift.common.errors import InvalidKernelError

# Any quantity below e^{-5} is treated as negligible when truncating tails.
NEGLIGIBLE = float(np.exp(-5.0))

DEFAULT_T_CUT = 200.0


class Kernel(ABC):
    """A memory kernel phi on [0, inf), evaluated elementwise on arrays."""

    name: str = "kernel"

    @abstractmethod
    def __call__(self, t):
        """Evaluate phi at ``t`` (scalar or array)."""

    @property
    @abstractmethod
    def t_cut(self) -> float:
        """Time beyond which the kernel is handled by a tail estimate."""

    def tail_l1(self) -> float:
        """Estimate of the integral of |phi| over [t_cut, inf)."""
        return 0.0

    def tail_l2(self) -> float:
        """Estimate of the integral of phi^2 over [t_cut, inf)."""
        return 0.0


@dataclass(frozen=True, eq=False)
class GeneralKernel(Kernel):
    """Kernel given by a vectorized function, treated numerically.

    The tail beyond ``t_cut`` is estimated from a declared decay envelope:
    ``tail_power=p`` for |phi(t)| ~ t^{-p} (p > 1) or ``tail_rate=r`` for
    |phi(t)| ~ e^{-rt}. Without an envelope the tail is taken as negligible.
    """

    func: Callable[[np.ndarray], np.ndarray]
    cut: float = DEFAULT_T_CUT
    tail_power: Optional[float] = None
    tail_rate: Optional[float] = None
    name: str = "general"

    def __post_init__(self):
        if not self.cut > 0:
            raise InvalidKernelError(f"t_cut must be positive, got {self.cut}")
        if self.tail_power is not None and not self.tail_power > 1:
            raise InvalidKernelError(f"tail_power must exceed 1 for an integrable tail, got {self.tail_power}")
        if self.tail_rate is not None and not self.tail_rate > 0:
            raise InvalidKernelError(f"tail_rate must be positive, got {self.tail_rate}")

    def __call__(self, t):
        return self.func(t)

    @property
    def t_cut(self) -> float:
        return self.cut

    def _edge_value(self) -> float:
        value = float(self.func(self.cut))
        if not np.isfinite(value):
            raise InvalidKernelError(f"kernel '{self.name}' is not finite at t_cut={self.cut}")
        return value

    def tail_l1(self) -> float:
        edge = abs(self._edge_value())
        if self.tail_power is not None:
            return edge * self.cut / (self.tail_power - 1.0)
        if self.tail_rate is not None:
            return edge / self.tail_rate
        return 0.0

    def tail_l2(self) -> float:
        edge = self._edge_value() ** 2
        if self.tail_power is not None:
            return edge * self.cut / (2.0 * self.tail_power - 1.0)
        if self.tail_rate is not None:
            return edge / (2.0 * self.tail_rate)
        return 0.0


@dataclass(frozen=True, eq=False)
class ExpSumKernel(Kernel):
    """phi(t) = sum_k eta_k exp(-beta_k t), with 0 < beta_1 < ... < beta_n."""

    eta: np.ndarray = field(default_factory=lambda: np.zeros(0))
    beta: np.ndarray = field(default_factory=lambda: np.zeros(0))
    name: str = "expsum"

    def __post_init__(self):
        eta = np.atleast_1d(np.asarray(self.eta, dtype=float)).copy()
        beta = np.atleast_1d(np.asarray(self.beta, dtype=float)).copy()
        if eta.ndim != 1 or eta.shape != beta.shape:
            raise InvalidKernelError(f"eta and beta must be 1-D of equal length, got {eta.shape} and {beta.shape}")
        if not (np.all(np.isfinite(eta)) and np.all(np.isfinite(beta))):
            raise InvalidKernelError("eta and beta must be finite")
        if np.any(beta <= 0):
            raise InvalidKernelError(f"decay rates must be strictly positive, got {beta.tolist()}")
        if np.any(np.diff(beta) <= 0):
            raise InvalidKernelError(f"decay rates must be strictly increasing, got {beta.tolist()}")
        eta.setflags(write=False)
        beta.setflags(write=False)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "beta", beta)

    @classmethod
    def from_ladder(cls, eta: Sequence[float], beta_base: float, name: str = "expsum") -> "ExpSumKernel":
        """Kernel on the decay ladder beta_base * (1, 2, ..., n)."""
        eta = np.asarray(eta, dtype=float)
        return cls(eta=eta, beta=ladder(beta_base, eta.size), name=name)

    @classmethod
    def zero(cls) -> "ExpSumKernel":
        return cls(eta=np.zeros(0), beta=np.zeros(0), name="zero")

    @property
    def n(self) -> int:
        return int(self.eta.size)

    @property
    def t_cut(self) -> float:
        # every term is below e^{-50} of its weight past this point
        return 50.0 / float(self.beta[0]) if self.n else 0.0

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        if self.n == 0:
            values = np.zeros_like(t_arr)
        else:
            values = np.exp(-np.multiply.outer(t_arr, self.beta)) @ self.eta
        return float(values) if values.ndim == 0 else values

    def antiderivative(self, t):
        """F(t) = -sum_k eta_k/beta_k exp(-beta_k t), so F(inf) = 0."""
        t_arr = np.asarray(t, dtype=float)
        if self.n == 0:
            return np.zeros_like(t_arr) if t_arr.ndim else 0.0
        values = np.exp(-np.multiply.outer(t_arr, self.beta)) @ (-self.eta / self.beta)
        return float(values) if values.ndim == 0 else values

    def laplace(self, rate: float) -> float:
        """Integral over [0, inf) of exp(-rate t) phi(t)."""
        return float(np.sum(self.eta / (self.beta + rate)))

    def inner(self, other: "ExpSumKernel") -> float:
        """L2 inner product over [0, inf), in closed form."""
        if self.n == 0 or other.n == 0:
            return 0.0
        gram = 1.0 / np.add.outer(self.beta, other.beta)
        return float(self.eta @ gram @ other.eta)

    def tail_inner(self, t0: float) -> float:
        """Integral of phi^2 over [t0, inf), in closed form."""
        if self.n == 0:
            return 0.0
        rates = np.add.outer(self.beta, self.beta)
        return float(self.eta @ (np.exp(-rates * t0) / rates) @ self.eta)

    def scaled(self, factor: float) -> "ExpSumKernel":
        return ExpSumKernel(eta=self.eta * factor, beta=self.beta, name=self.name)


def ladder(beta_base: float, n: int) -> np.ndarray:
    """Decay ladder beta_base * (1, ..., n)."""
    return beta_base * np.arange(1, n + 1, dtype=float)


def expsum_difference(a: ExpSumKernel, b: ExpSumKernel) -> ExpSumKernel:
    """a - b merged into a single exponential sum (equal rates combined)."""
    rates = np.concatenate([a.beta, b.beta])
    coeffs = np.concatenate([a.eta, -b.eta])
    if rates.size == 0:
        return ExpSumKernel.zero()
    unique_rates, inverse = np.unique(rates, return_inverse=True)
    merged = np.bincount(inverse, weights=coeffs, minlength=unique_rates.size)
    keep = merged != 0.0
    return ExpSumKernel(eta=merged[keep], beta=unique_rates[keep], name=f"{a.name}-{b.name}")


def kernel_difference(a: Kernel, b: Kernel) -> Kernel:
    """The kernel a - b; exact exponential sum when both inputs are."""
    if isinstance(a, ExpSumKernel) and isinstance(b, ExpSumKernel):
        return expsum_difference(a, b)
    general = a if isinstance(a, GeneralKernel) else b
    cut = max(a.t_cut, b.t_cut)
    return GeneralKernel(
        func=lambda t: a(t) - b(t),
        cut=cut,
        tail_power=getattr(general, "tail_power", None),
        tail_rate=getattr(general, "tail_rate", None),
        name=f"{a.name}-{b.name}",
    )


def scaled_kernel(kernel: Kernel, factor: float) -> Kernel:
    """c * phi, keeping the kernel's representation."""
    if isinstance(kernel, ExpSumKernel):
        return kernel.scaled(factor)
    return GeneralKernel(
        func=lambda t: factor * kernel(t),
        cut=kernel.t_cut,
        tail_power=getattr(kernel, "tail_power", None),
        tail_rate=getattr(kernel, "tail_rate", None),
        name=f"{factor:g}*{kernel.name}",
    )


def tabulated_kernel(times: Sequence[float], values: Sequence[float], name: str = "tabulated") -> GeneralKernel:
    """Linear interpolation of (t, phi(t)) samples, zero past the last abscissa."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.ndim != 1 or times.shape != values.shape or times.size < 2:
        raise InvalidKernelError("tabulated kernel needs at least two (t, phi) pairs")
    if np.any(np.diff(times) <= 0) or times[0] < 0:
        raise InvalidKernelError("tabulated kernel abscissae must be nonnegative and strictly increasing")
    if not np.all(np.isfinite(values)):
        raise InvalidKernelError("tabulated kernel has non-finite values")
    return GeneralKernel(
        func=lambda t: np.interp(t, times, values, right=0.0),
        cut=float(times[-1]),
        name=name,
    )
