"""L1/L2 norms of kernels by panelled adaptive Gauss-Kronrod quadrature.

General kernels are integrated on [0, t_cut] over panels that are uniform
near the origin and grow geometrically afterwards; sign changes of the
integrand are located first so that |phi| is smooth on every panel. The
remainder over [t_cut, inf) comes from the kernel's declared tail envelope.
Exponential sums are integrated exactly between their sign changes.
"""

import warnings
from typing import Callable, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq

from hawkes_lift.common.errors import InvalidKernelError
from hawkes_lift.common.logging import get_logger
from hawkes_lift.kernel.base import ExpSumKernel, Kernel, expsum_difference, kernel_difference

logger = get_logger(__name__)

_UNIFORM_SPAN = 10.0
_SAMPLES = 8001


def panel_edges(t_cut: float, uniform_span: float = _UNIFORM_SPAN, n_uniform: int = 40, n_geometric: int = 40) -> np.ndarray:
    """Uniform panels on [0, min(span, t_cut)], geometric growth up to t_cut."""
    head = min(uniform_span, t_cut)
    edges = np.linspace(0.0, head, n_uniform + 1)
    if t_cut > head:
        edges = np.concatenate([edges, np.geomspace(head, t_cut, n_geometric + 1)[1:]])
    return edges


def sample_checked(kernel: Kernel, times: np.ndarray) -> np.ndarray:
    """Evaluate ``kernel`` on ``times``; non-finite samples are an invalid kernel."""
    values = np.asarray(kernel(times), dtype=float)
    if values.shape != times.shape:
        values = np.broadcast_to(values, times.shape).astype(float)
    if not np.all(np.isfinite(values)):
        bad = times[~np.isfinite(values)][0]
        raise InvalidKernelError(f"kernel '{kernel.name}' is not finite at t={bad:.6g}")
    return values


def sign_changes(func: Callable, values: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Roots of ``func`` bracketed by sign changes of its samples."""
    signs = np.sign(values)
    idx = np.nonzero(signs[:-1] * signs[1:] < 0)[0]
    roots = [brentq(func, times[i], times[i + 1], xtol=1e-14) for i in idx]
    return np.asarray(roots, dtype=float)


def integrate_panels(func: Callable[[float], float], edges: np.ndarray) -> float:
    """Sum of adaptive Gauss-Kronrod integrals over consecutive panels."""
    total = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        for a, b in zip(edges[:-1], edges[1:]):
            if b <= a:
                continue
            value, _ = quad(func, a, b, limit=200, epsabs=1e-14, epsrel=1e-11)
            total += value
    if not np.isfinite(total):
        raise InvalidKernelError("quadrature produced a non-finite value")
    return total


def _scalar(kernel: Kernel) -> Callable[[float], float]:
    return lambda t: float(kernel(t))


def _expsum_l1(kernel: ExpSumKernel) -> float:
    if kernel.n == 0:
        return 0.0
    t_max = kernel.t_cut
    times = np.linspace(0.0, t_max, _SAMPLES)
    values = kernel(times)
    roots = sign_changes(_scalar(kernel), values, times)
    nodes = np.concatenate([[0.0], roots, [t_max]])
    prims = kernel.antiderivative(nodes)
    total = float(np.sum(np.abs(np.diff(prims))))
    # [t_max, inf): F(inf) = 0
    return total + abs(float(prims[-1]))


def _general_l1(kernel: Kernel, include_tail: bool) -> float:
    t_cut = kernel.t_cut
    times = np.linspace(0.0, t_cut, _SAMPLES)
    values = sample_checked(kernel, times)
    roots = sign_changes(_scalar(kernel), values, times)
    edges = np.unique(np.concatenate([panel_edges(t_cut), roots]))
    scalar = _scalar(kernel)
    body = integrate_panels(lambda t: abs(scalar(t)), edges)
    tail = kernel.tail_l1() if include_tail else 0.0
    logger.debug(f"L1 of '{kernel.name}': body={body:.10g} on [0, {t_cut:g}], tail={tail:.3g}")
    return body + tail


def l1_norm(kernel: Kernel, include_tail: bool = True) -> float:
    """||phi||_1 over [0, inf).

    Args:
        kernel: The kernel to integrate.
        include_tail: Add the envelope estimate over [t_cut, inf) for general
            kernels. Exponential sums are always integrated over [0, inf).

    Raises:
        InvalidKernelError: If the kernel has non-finite samples.
    """
    if isinstance(kernel, ExpSumKernel):
        return _expsum_l1(kernel)
    return _general_l1(kernel, include_tail)


def l2_norm_sq(kernel: Kernel, include_tail: bool = True) -> float:
    """||phi||_2^2 over [0, inf)."""
    if isinstance(kernel, ExpSumKernel):
        return kernel.inner(kernel)
    t_cut = kernel.t_cut
    sample_checked(kernel, np.linspace(0.0, t_cut, _SAMPLES))
    scalar = _scalar(kernel)
    body = integrate_panels(lambda t: scalar(t) ** 2, panel_edges(t_cut))
    return body + (kernel.tail_l2() if include_tail else 0.0)


def l2_error_sq(kernel: Kernel, eta, beta_base: float) -> float:
    """I(eta): squared L2 distance between the ladder sum with ``eta`` and ``kernel``.

    Over [t_cut, inf) the general kernel contributes its envelope estimate and
    the ladder sum its exact squared tail. The cross term -2 int phi^n phi over
    [t_cut, inf) is left out; by Cauchy-Schwarz it is at most
    2 sqrt(tail_l2(phi) * tail_inner(phi^n, t_cut)), logged at debug level. For
    ladder fits with t_cut >= 50 / beta the ladder tail is below e^{-100}.
    """
    if not beta_base > 0:
        raise InvalidKernelError(f"beta_base must be positive, got {beta_base}")
    approx = ExpSumKernel.from_ladder(eta, beta_base)
    if isinstance(kernel, ExpSumKernel):
        diff = expsum_difference(approx, kernel)
        return max(diff.inner(diff), 0.0)
    t_cut = kernel.t_cut
    sample_checked(kernel, np.linspace(0.0, t_cut, _SAMPLES))
    scalar = _scalar(kernel)
    body = integrate_panels(lambda t: (float(approx(t)) - scalar(t)) ** 2, panel_edges(t_cut))
    approx_tail = approx.tail_inner(t_cut)
    cross_bound = 2.0 * float(np.sqrt(kernel.tail_l2() * approx_tail))
    logger.debug(f"I(eta) for '{kernel.name}': omitted tail cross term <= {cross_bound:.3g}")
    return body + kernel.tail_l2() + approx_tail


def l1_distance(a: Kernel, b: Kernel) -> float:
    """||a - b||_1."""
    return l1_norm(kernel_difference(a, b))


def l2_distance_sq(a: Kernel, b: Kernel) -> float:
    """||a - b||_2^2."""
    return l2_norm_sq(kernel_difference(a, b))


def laplace_moments(kernel: Kernel, rates: np.ndarray) -> np.ndarray:
    """v_j = integral of exp(-rate_j t) phi(t) over [0, inf) for each rate.

    General kernels are integrated on [0, t_cut]; beyond it exp(-rate t) is
    negligible for every rate used in ladder fits.
    """
    rates = np.asarray(rates, dtype=float)
    if isinstance(kernel, ExpSumKernel):
        return np.array([kernel.laplace(rate) for rate in rates])
    t_cut = kernel.t_cut
    sample_checked(kernel, np.linspace(0.0, t_cut, _SAMPLES))
    scalar = _scalar(kernel)
    edges = panel_edges(t_cut)
    return np.array([integrate_panels(lambda t, r=rate: np.exp(-r * t) * scalar(t), edges) for rate in rates])


def gauss_legendre_grid(t_cut: float, order: int = 16) -> Tuple[np.ndarray, np.ndarray]:
    """Fixed composite Gauss-Legendre nodes/weights on the standard panels of [0, t_cut].

    Used where the same integral is evaluated many times (L1 descent).
    """
    ref_nodes, ref_weights = leggauss(order)
    edges = panel_edges(t_cut, n_uniform=400, n_geometric=80)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (a + b) * 0.5 + half * ref_nodes[None, :]
    weights = half * ref_weights[None, :]
    return nodes.ravel(), weights.ravel()
