"""Sum-of-exponentials approximation of a kernel on a fixed decay ladder.

The ladder beta, 2 beta, ..., n beta is an input and is never optimised
(the objective is not convex in the rates). Two objectives are offered:

* ``fit_l2`` minimises I(eta) = ||phi^n - phi||_2^2 exactly by solving the
  normal equations M_H eta = v, where M_H = (1 / (beta (i + j))) is a modified
  Hilbert matrix.
* ``fit_l1`` minimises the convex J(eta) = ||phi^n - phi||_1 by a deterministic
  pattern search with shrinking steps, started from the L2 solution. J can be
  restricted to [0, negligible_horizon(beta)], the span on which the ladder
  basis is not negligible. The 2- and 3-term fits of the nonmonotone builtin
  shipped in configs/nonmonotone_fits.cfg use that window.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from hawkes_lift.common.errors import DomainError, IllConditionedError, InvalidKernelError, NumericError
from hawkes_lift.common.logging import get_logger
from hawkes_lift.kernel.quadrature import (
    gauss_legendre_grid,
    l1_norm,
    l2_error_sq,
    l2_norm_sq,
    laplace_moments,
    sample_checked,
)
from hawkes_lift.kernel.base import NEGLIGIBLE, ExpSumKernel, Kernel, kernel_difference, ladder

logger = get_logger(__name__)

DEFAULT_CONDITION_THRESHOLD = 1e12


@dataclass(frozen=True, eq=False)
class FitResult:
    """Fitted coefficients on the ladder beta_base * (1..n) and achieved errors."""

    eta: np.ndarray
    beta_base: float
    n: int
    l1_error: float
    l2_error_sq: float
    hilbert_condition: float
    method: str = "l2"
    converged: bool = True
    iterations: int = 0
    window: Optional[float] = None
    name: str = field(default="fit")

    @property
    def beta(self) -> np.ndarray:
        return ladder(self.beta_base, self.n)

    @property
    def kernel(self) -> ExpSumKernel:
        return ExpSumKernel(eta=self.eta, beta=self.beta, name=f"{self.name}_n{self.n}")

    def to_row(self, max_n: Optional[int] = None) -> Dict[str, object]:
        """CSV row: n, beta, eta_1..eta_max_n, l1_error, l2_error_sq, condition."""
        width = max_n or self.n
        row: Dict[str, object] = {"n": self.n, "beta": self.beta_base}
        for k in range(width):
            row[f"eta_{k + 1}"] = float(self.eta[k]) if k < self.n else float("nan")
        row["l1_error"] = self.l1_error
        row["l2_error_sq"] = self.l2_error_sq
        row["condition"] = self.hilbert_condition
        return row


def modified_hilbert(n: int, beta_base: float) -> np.ndarray:
    """Gram matrix of the ladder basis in L2(0, inf): entries 1 / (beta (i + j))."""
    idx = np.arange(1, n + 1, dtype=float)
    return 1.0 / (beta_base * np.add.outer(idx, idx))


def _validate(phi: Kernel, n: int, beta_base: float) -> None:
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    if not beta_base > 0:
        raise DomainError(f"beta_base must be positive, got {beta_base}")
    # L1 and L2 integrability, numerically
    if not (np.isfinite(l1_norm(phi)) and np.isfinite(l2_norm_sq(phi))):
        raise InvalidKernelError(f"kernel '{phi.name}' is not integrable")


def _errors(phi: Kernel, eta: np.ndarray, beta_base: float) -> tuple:
    approx = ExpSumKernel.from_ladder(eta, beta_base)
    return l1_norm(kernel_difference(approx, phi)), l2_error_sq(phi, eta, beta_base)


def fit_l2(
    phi: Kernel,
    n: int,
    beta_base: float,
    condition_threshold: float = DEFAULT_CONDITION_THRESHOLD,
) -> FitResult:
    """Least-squares fit: solve M_H eta = v with a Cholesky factorisation.

    Raises:
        DomainError: If n < 1 or beta_base <= 0.
        IllConditionedError: If cond(M_H) exceeds ``condition_threshold``.
        InvalidKernelError: If phi is not finite or not integrable.
    """
    _validate(phi, n, beta_base)
    n = int(n)
    gram = modified_hilbert(n, beta_base)
    condition = float(np.linalg.cond(gram))
    if condition > condition_threshold:
        raise IllConditionedError(condition, condition_threshold)
    moments = laplace_moments(phi, ladder(beta_base, n))
    try:
        factor = cho_factor(gram, lower=True)
    except LinAlgError as exc:
        raise NumericError(f"modified Hilbert matrix is not numerically positive definite: {exc}")
    eta = cho_solve(factor, moments)
    l1_error, l2_error = _errors(phi, eta, beta_base)
    logger.info(f"✅ L2 fit of '{phi.name}' with n={n}, beta={beta_base:g}: eta={np.round(eta, 4).tolist()}, "
                f"L1 error={l1_error:.4g}, cond={condition:.3g}")
    return FitResult(
        eta=eta,
        beta_base=float(beta_base),
        n=n,
        l1_error=l1_error,
        l2_error_sq=l2_error,
        hilbert_condition=condition,
        method="l2",
        name=phi.name,
    )


def negligible_horizon(beta_base: float) -> float:
    """Time after which every ladder term e^{-beta k t} is below ``NEGLIGIBLE``."""
    if not beta_base > 0:
        raise DomainError(f"beta_base must be positive, got {beta_base}")
    return float(-np.log(NEGLIGIBLE) / beta_base)


def _search_directions(n: int) -> np.ndarray:
    """Unit vectors plus the pairwise moves e_i + e_j and e_i - e_j.

    The discretised J is piecewise linear; pairwise moves get the search off
    kinks where no single coordinate improves.
    """
    eye = np.eye(n)
    pairs = [eye[i] + sign * eye[j] for i in range(n) for j in range(i + 1, n) for sign in (1.0, -1.0)]
    moves = np.vstack([eye] + pairs) if pairs else eye
    return np.vstack([moves, -moves])


def fit_l1(
    phi: Kernel,
    n: int,
    beta_base: float,
    init: Optional[Sequence[float]] = None,
    window: Optional[float] = None,
    step_tol: float = 1e-7,
    max_sweeps: int = 5000,
    condition_threshold: float = DEFAULT_CONDITION_THRESHOLD,
) -> FitResult:
    """Minimise J(eta) by a pattern search with shrinking steps.

    A sweep tries every coordinate and pairwise move at the current step and
    keeps each improvement; a sweep without improvement halves the step. The
    search stops once the step falls below ``step_tol``. When the sweep limit
    is reached first the best point so far is returned with
    ``converged=False``.

    Args:
        window: Integrate J over [0, window] only. ``negligible_horizon(beta)``
            is the window past which the ladder basis is negligible. ``None``
            integrates over [0, t_cut] and compares against ``init`` with
            adaptive quadrature, so the result never has a larger J than it.

    The reported ``l1_error`` is always ||phi^n - phi||_1 over [0, inf).
    """
    _validate(phi, n, beta_base)
    n = int(n)
    if window is not None and not window > 0:
        raise DomainError(f"window must be positive, got {window}")
    gram = modified_hilbert(n, beta_base)
    condition = float(np.linalg.cond(gram))
    if init is None:
        init = fit_l2(phi, n, beta_base, condition_threshold=condition_threshold).eta
    start = np.asarray(init, dtype=float).copy()
    if start.shape != (n,):
        raise DomainError(f"init must have length {n}, got {start.shape}")

    if window is not None:
        fit_end = float(window)
    elif isinstance(phi, ExpSumKernel):
        fit_end = max(phi.t_cut, 50.0 / beta_base)
    else:
        fit_end = phi.t_cut
    nodes, weights = gauss_legendre_grid(fit_end)
    target = sample_checked(phi, nodes)
    basis = np.exp(-np.multiply.outer(nodes, ladder(beta_base, n)))

    def objective(eta: np.ndarray) -> float:
        return float(weights @ np.abs(basis @ eta - target))

    moves = _search_directions(n)
    eta = start.copy()
    best = objective(eta)
    step = max(0.1 * float(np.max(np.abs(eta))), 0.05)
    converged = False
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        improved = False
        for move in moves:
            trial = eta + step * move
            value = objective(trial)
            if value < best:
                eta, best, improved = trial, value, True
        if not improved:
            step *= 0.5
            if step < step_tol:
                converged = True
                break

    l1_error, l2_error = _errors(phi, eta, beta_base)
    if window is None:
        l1_start, l2_start = _errors(phi, start, beta_base)
        if l1_start < l1_error:
            # grid optimum is not better once measured adaptively
            eta, l1_error, l2_error = start, l1_start, l2_start
    if not converged:
        logger.warning(f"⚠️  L1 fit of '{phi.name}' (n={n}) stopped after {sweeps} sweeps without meeting "
                       f"step tolerance {step_tol:g}; returning best-so-far")
    else:
        span = f"[0, {fit_end:g}]"
        logger.info(f"✅ L1 fit of '{phi.name}' with n={n}, beta={beta_base:g} on {span}: "
                    f"eta={np.round(eta, 4).tolist()}, J={l1_error:.4g} after {sweeps} sweeps")
    return FitResult(
        eta=eta,
        beta_base=float(beta_base),
        n=n,
        l1_error=l1_error,
        l2_error_sq=l2_error,
        hilbert_condition=condition,
        method="l1",
        converged=converged,
        iterations=sweeps,
        window=None if window is None else float(window),
        name=phi.name,
    )


def fit(phi: Kernel, n: int, beta_base: float, method: str = "l2", **kwargs) -> FitResult:
    """Dispatch to :func:`fit_l2` or :func:`fit_l1`."""
    if method == "l2":
        return fit_l2(phi, n, beta_base, **kwargs)
    if method == "l1":
        return fit_l1(phi, n, beta_base, **kwargs)
    raise DomainError(f"unknown fit method '{method}', expected 'l1' or 'l2'")


def fit_ladder(
    phi: Kernel,
    n_list: Sequence[int],
    beta_base: float,
    method: str = "l2",
    window: Optional[float] = None,
) -> List[FitResult]:
    """Fit every order in ``n_list``; L1 fits are warm-started from the L2 solution.

    ``window`` only applies to L1 fits.
    """
    if not n_list:
        raise DomainError("n_list must not be empty")
    kwargs = {"window": window} if method == "l1" else {}
    return [fit(phi, n, beta_base, method=method, **kwargs) for n in n_list]
