"""Market with contagious jumps and the log-utility Hamiltonian.

The asset jumps by the relative size gamma_jump at the events of a Hawkes
process with intensity min((lambda0 + eta . xi)+, lambda_cap).
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from hawkes_lift.common.errors import DomainError
from hawkes_lift.common.logging import get_logger
from hawkes_lift.hawkes_core.marks import PointMass, build_b
from hawkes_lift.hawkes_core.model import GronwallCase, ModelSpec
from hawkes_lift.kernel.base import ExpSumKernel, Kernel

logger = get_logger(__name__)

DEFAULT_LAMBDA_CAP = 50.0


def check_jump_size(gamma_jump: float) -> None:
    """1 + gamma omega must stay positive for omega in [0, 1]."""
    if not gamma_jump > -1.0:
        raise DomainError(f"1 + gamma*omega <= 0 for some omega in [0, 1] (gamma_jump={gamma_jump})")


@dataclass(frozen=True, eq=False)
class MarketSpec:
    mu: float
    r: float
    sigma: float
    gamma_jump: float
    rho: float
    x0_wealth: float
    lambda0: float
    kernel: Kernel
    lambda_cap: float = DEFAULT_LAMBDA_CAP

    def __post_init__(self):
        if not self.rho > 0:
            raise DomainError(f"discount rate rho must be positive, got {self.rho}")
        if not self.x0_wealth > 0:
            raise DomainError(f"initial wealth must be positive, got {self.x0_wealth}")
        if not self.sigma > 0:
            raise DomainError(f"volatility sigma must be positive, got {self.sigma}")
        if self.lambda0 < 0:
            raise DomainError(f"lambda0 must be >= 0, got {self.lambda0}")
        if not self.lambda_cap > self.lambda0:
            raise DomainError(f"lambda_cap must exceed lambda0, got {self.lambda_cap} <= {self.lambda0}")
        check_jump_size(self.gamma_jump)

    @property
    def excess_return(self) -> float:
        return self.mu - self.r

    @property
    def K(self) -> float:
        return 1.0 / self.rho

    def with_kernel(self, kernel: Kernel) -> "MarketSpec":
        return MarketSpec(self.mu, self.r, self.sigma, self.gamma_jump, self.rho, self.x0_wealth,
                          self.lambda0, kernel, self.lambda_cap)

    def intensity(self, u):
        """Market intensity for the excitation u = eta . xi."""
        return np.minimum(np.maximum(self.lambda0 + np.asarray(u, dtype=float), 0.0), self.lambda_cap)


def market_model(mkt: MarketSpec) -> ModelSpec:
    """Counting model of the market's jump times; psi carries the baseline so psi(0) = lambda0."""
    lambda0, cap = mkt.lambda0, mkt.lambda_cap
    return ModelSpec(
        mu=lambda t, x: 0.0,
        sigma=lambda t, x: 0.0,
        gamma=lambda t, x: 1.0,
        nu=lambda t, x: 1.0,
        lambda_inf=lambda t, x: 0.0,
        psi=lambda u: min(max(lambda0 + u, 0.0), cap),
        b=build_b("one"),
        mark_dist=PointMass(1.0),
        gronwall_case=GronwallCase.PSI_BOUNDED,
        psi_bound=cap,
        lambda_inf_bound=0.0,
        name="market",
        params=dict(lambda0=lambda0, lambda_cap=cap),
    )


class PsiHat(NamedTuple):
    value: float
    omega: float


def hamiltonian(omega, lam, mkt: MarketSpec):
    """h(omega) = (mu - r) omega - sigma^2 omega^2 / 2 + lam log(1 + gamma omega)."""
    omega = np.asarray(omega, dtype=float)
    return (
        mkt.excess_return * omega
        - 0.5 * mkt.sigma**2 * omega**2
        + np.asarray(lam, dtype=float) * np.log1p(mkt.gamma_jump * omega)
    )


def _omega_star(lam: np.ndarray, mkt: MarketSpec) -> np.ndarray:
    """Maximiser of the strictly concave h on [0, 1] from the root of h'."""
    a, s2, g = mkt.excess_return, mkt.sigma**2, mkt.gamma_jump
    if g == 0.0:
        return np.full(lam.shape, min(max(a / s2, 0.0), 1.0))
    slope0 = a + lam * g
    slope1 = a - s2 + lam * g / (1.0 + g)
    # (a - s2 w)(1 + g w) + lam g = 0
    A, B, C = -s2 * g, a * g - s2, slope0
    disc = np.maximum(B * B - 4.0 * A * C, 0.0)
    q = -0.5 * (B + np.copysign(np.sqrt(disc), B))
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = q / A
        r2 = np.where(q != 0.0, C / q, np.nan)
    inside = (r1 >= 0.0) & (r1 <= 1.0)
    interior = np.clip(np.where(inside, r1, r2), 0.0, 1.0)
    return np.where(slope0 <= 0.0, 0.0, np.where(slope1 >= 0.0, 1.0, interior))


def psi_hat_array(lam, mkt: MarketSpec) -> PsiHat:
    """Vectorised psi_hat: arrays of values K h(omega*) and maximisers omega*."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise DomainError("intensity values must be >= 0")
    omega = _omega_star(lam, mkt)
    return PsiHat(value=mkt.K * hamiltonian(omega, lam, mkt), omega=omega)


def psi_hat(lam: float, mkt: MarketSpec) -> PsiHat:
    """K sup_{omega in [0,1]} h(omega) and the maximiser.

    Falls back to a bounded scalar search when the quadratic root is not
    usable numerically.
    """
    if lam < 0:
        raise DomainError(f"intensity must be >= 0, got {lam}")
    check_jump_size(mkt.gamma_jump)
    omega = float(_omega_star(np.array([float(lam)]), mkt)[0])
    if not np.isfinite(omega):
        logger.debug(f"Quadratic root unusable at lam={lam}; using scalar search")
        result = minimize_scalar(lambda w: -float(hamiltonian(w, lam, mkt)), bounds=(0.0, 1.0),
                                 method="bounded", options={"xatol": 1e-12})
        omega = float(result.x)
    return PsiHat(value=float(mkt.K * hamiltonian(omega, lam, mkt)), omega=omega)


def consumption_constant(mkt: MarketSpec) -> float:
    """(1/rho)(log X0 + log rho + r/rho - 1): value of c = rho without the investment term."""
    rho = mkt.rho
    return (np.log(mkt.x0_wealth) + np.log(rho) + mkt.r / rho - 1.0) / rho


def merton_value(mkt: MarketSpec) -> float:
    """Value without jumps: the constant plus sup h / rho^2."""
    no_jumps = MarketSpec(mkt.mu, mkt.r, mkt.sigma, 0.0, mkt.rho, mkt.x0_wealth, mkt.lambda0,
                          mkt.kernel, mkt.lambda_cap)
    best = psi_hat(0.0, no_jumps)
    return float(consumption_constant(mkt) + best.value / mkt.rho)


def require_expsum(kernel: Kernel) -> ExpSumKernel:
    if not isinstance(kernel, ExpSumKernel):
        raise TypeError(f"the closed-form value needs an exponential-sum kernel, got {type(kernel).__name__}")
    return kernel
