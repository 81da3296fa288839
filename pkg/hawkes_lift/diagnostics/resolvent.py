"""Resolvent of a kernel and the first-moment intensity bound."""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid
from scipy.signal import fftconvolve

from hawkes_lift.common.errors import DivergentSeriesError, DomainError
from hawkes_lift.common.logging import get_logger
from hawkes_lift.hawkes_core.model import ModelSpec
from hawkes_lift.kernel.quadrature import l1_norm, sample_checked
from hawkes_lift.kernel.base import Kernel

from .assumptions import SamplingBox, Verdict, check_assumptions

logger = get_logger(__name__)

SERIES_TOLERANCE = 1e-10
MAX_TERMS = 100_000


def trapezoid_convolution(a: np.ndarray, b: np.ndarray, dt: float) -> np.ndarray:
    """(a * b)(t_k) on a uniform grid by the trapezoid rule; symmetric in a and b."""
    full = fftconvolve(a, b)[: len(a)]
    return dt * (full - 0.5 * (a[0] * b + a * b[0]))


@dataclass(frozen=True, eq=False)
class Resolvent:
    """Tabulated Q = sum_{n>=1} phi^{*n} on a uniform grid."""

    times: np.ndarray
    values: np.ndarray
    phi_values: np.ndarray
    terms: int
    kernel_name: str = ""

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def __call__(self, t):
        """Linear interpolation; constant beyond the last grid point."""
        values = np.interp(np.asarray(t, dtype=float), self.times, self.values)
        return float(values) if np.ndim(values) == 0 else values

    def integral(self) -> float:
        return float(trapezoid(self.values, self.times))

    def renewal_residual(self) -> float:
        """sup over the grid of |Q - phi - phi * Q|."""
        rhs = self.phi_values + trapezoid_convolution(self.phi_values, self.values, self.dt)
        return float(np.max(np.abs(self.values - rhs)))


def resolvent(kernel: Kernel, dt: float, horizon: float, tol: float = SERIES_TOLERANCE) -> Resolvent:
    """Sum the Neumann series of iterated convolutions until a term's L1 mass drops below ``tol``.

    Raises:
        DivergentSeriesError: If ||phi||_1 >= 1.
    """
    if not (dt > 0 and horizon > dt):
        raise DomainError(f"need 0 < dt < horizon, got dt={dt}, horizon={horizon}")
    norm = l1_norm(kernel)
    if norm >= 1.0:
        raise DivergentSeriesError(f"||phi||_1 = {norm:.6g} >= 1 for kernel '{kernel.name}'; the series diverges")

    n_steps = int(round(horizon / dt))
    times = np.arange(n_steps + 1) * dt
    phi = np.asarray(sample_checked(kernel, times), dtype=float)
    total = phi.copy()
    term = phi
    terms = 1
    while trapezoid(np.abs(term), times) >= tol:
        if terms >= MAX_TERMS:
            raise DivergentSeriesError(f"resolvent series did not reach tolerance {tol:g} in {MAX_TERMS} terms")
        term = trapezoid_convolution(term, phi, dt)
        total += term
        terms += 1
    logger.debug(f"Resolvent of '{kernel.name}': {terms} terms on [0, {horizon:g}] with dt={dt:g}")
    return Resolvent(times=times, values=total, phi_values=phi, terms=terms, kernel_name=kernel.name)


def intensity_bound(model: ModelSpec, kernel: Kernel, box: SamplingBox = None) -> float:
    """(lambda_bar + psi(0)) / (1 - L E b(Y) ||phi||_1), an upper bound on sup_t E[lambda_t].

    Raises:
        DomainError: If the stability product is not below 1.
    """
    report = check_assumptions(model, kernel, box)
    if report.stability_product >= 1.0:
        raise DomainError(
            f"stability condition fails (product {report.stability_product:.4g} >= 1); no first-moment bound"
        )
    if report.stability is Verdict.UNKNOWN:
        logger.warning(f"⚠️ Stability product {report.stability_product:.4g} is close to 1; the bound is loose")
    return report.baseline / (1.0 - report.stability_product)
