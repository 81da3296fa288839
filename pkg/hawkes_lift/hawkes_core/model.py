"""Model coefficients of the Hawkes jump-diffusion and the builtin model registry."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Optional

import math

from hawkes_lift.common.errors import ConfigError, DomainError
from hawkes_lift.common.logging import get_logger

from .marks import MarkDistribution, PointMass, build_b

logger = get_logger(__name__)

Coefficient = Callable[[float, float], float]


class GronwallCase(str, Enum):
    """Which a-priori bound makes the moment estimates close."""

    PSI_BOUNDED = "psi_bounded"
    STATE_FREE = "state_free"


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Coefficients (mu, sigma, gamma, nu, lambda_inf) of (t, x), psi of u, b of y.

    ``psi_bound`` is sup psi when known and ``lambda_inf_bound`` sup lambda_inf;
    together they give the rate that safely dominates every runtime intensity.
    """

    mu: Coefficient
    sigma: Coefficient
    gamma: Coefficient
    nu: Coefficient
    lambda_inf: Coefficient
    psi: Callable[[float], float]
    b: Callable[[float], float]
    mark_dist: MarkDistribution
    x0: float = 0.0
    gronwall_case: GronwallCase = GronwallCase.PSI_BOUNDED
    psi_bound: Optional[float] = None
    lambda_inf_bound: Optional[float] = None
    name: str = "custom"
    params: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.gronwall_case is GronwallCase.PSI_BOUNDED and self.psi_bound is None:
            raise DomainError(f"model '{self.name}': PSI_BOUNDED needs psi_bound")
        if self.psi_bound is not None and self.psi_bound < 0:
            raise DomainError(f"model '{self.name}': psi_bound must be >= 0")

    def dominating_rate(self) -> Optional[float]:
        """lambda_bar + Lambda_psi when both bounds are known, else None."""
        if self.psi_bound is None or self.lambda_inf_bound is None:
            return None
        return float(self.lambda_inf_bound + self.psi_bound)

    def intensity(self, t: float, x: float, u: float) -> float:
        return self.lambda_inf(t, x) + self.psi(u)


def positive_part(u: float) -> float:
    return u if u > 0.0 else 0.0


def capped(cap: float) -> Callable[[float], float]:
    def psi(u: float) -> float:
        return min(max(u, 0.0), cap)

    return psi


def _const(value: float) -> Coefficient:
    return lambda t, x: value


def jump_ou(
    mu: float = 0.5,
    sigma: float = 1.0,
    jump_scale: float = 40.0,
    jump_width: float = 16.0,
    lambda_inf: float = 1.0,
    psi_cap: float = 7.0,
    nu_floor: float = 0.2,
    nu_decay: float = 0.1,
    x0: float = 0.0,
) -> ModelSpec:
    """Mean-reverting diffusion whose jumps push X back towards zero.

    dX = -mu X dt + sigma dW + gamma(X-) dN, gamma(x) = -jump_scale x / (1 + jump_width x^2),
    nu(x) = nu_floor + (1 - nu_floor) exp(-nu_decay x^2), psi(u) = min(u+, psi_cap).
    """
    if not 0.0 <= nu_floor <= 1.0:
        raise DomainError(f"nu_floor must lie in [0, 1], got {nu_floor}")
    return ModelSpec(
        mu=lambda t, x: -mu * x,
        sigma=_const(sigma),
        gamma=lambda t, x: -jump_scale * x / (1.0 + jump_width * x * x),
        nu=lambda t, x: nu_floor + (1.0 - nu_floor) * math.exp(-nu_decay * x * x),
        lambda_inf=_const(lambda_inf),
        psi=capped(psi_cap),
        b=build_b("one"),
        mark_dist=PointMass(1.0),
        x0=x0,
        gronwall_case=GronwallCase.PSI_BOUNDED,
        psi_bound=psi_cap,
        lambda_inf_bound=lambda_inf,
        name="jump_ou",
        params=dict(mu=mu, sigma=sigma, jump_scale=jump_scale, jump_width=jump_width,
                    lambda_inf=lambda_inf, psi_cap=psi_cap, nu_floor=nu_floor, nu_decay=nu_decay, x0=x0),
    )


def linear_hawkes(lambda0: float = 1.0, x0: float = 0.0) -> ModelSpec:
    """Classical linear Hawkes process; X counts the accepted events."""
    if lambda0 < 0:
        raise DomainError(f"lambda0 must be >= 0, got {lambda0}")
    return ModelSpec(
        mu=_const(0.0),
        sigma=_const(0.0),
        gamma=_const(1.0),
        nu=_const(1.0),
        lambda_inf=_const(lambda0),
        psi=positive_part,
        b=build_b("one"),
        mark_dist=PointMass(1.0),
        x0=x0,
        gronwall_case=GronwallCase.STATE_FREE,
        lambda_inf_bound=lambda0,
        name="linear_hawkes",
        params=dict(lambda0=lambda0, x0=x0),
    )


def poisson(rate: float = 1.0, x0: float = 0.0) -> ModelSpec:
    """Homogeneous Poisson counting process (psi identically 0)."""
    if rate < 0:
        raise DomainError(f"rate must be >= 0, got {rate}")
    return ModelSpec(
        mu=_const(0.0),
        sigma=_const(0.0),
        gamma=_const(1.0),
        nu=_const(1.0),
        lambda_inf=_const(rate),
        psi=lambda u: 0.0,
        b=build_b("one"),
        mark_dist=PointMass(1.0),
        x0=x0,
        gronwall_case=GronwallCase.PSI_BOUNDED,
        psi_bound=0.0,
        lambda_inf_bound=rate,
        name="poisson",
        params=dict(rate=rate, x0=x0),
    )


def state_free(
    lambda0: float = 1.0,
    psi_cap: float = 10.0,
    mu: float = 0.0,
    sigma: float = 0.5,
    gamma: float = 1.0,
    x0: float = 0.0,
) -> ModelSpec:
    """Intensity independent of X: gamma, nu and lambda_inf are constants."""
    return ModelSpec(
        mu=_const(mu),
        sigma=_const(sigma),
        gamma=_const(gamma),
        nu=_const(1.0),
        lambda_inf=_const(lambda0),
        psi=capped(psi_cap),
        b=build_b("one"),
        mark_dist=PointMass(1.0),
        x0=x0,
        gronwall_case=GronwallCase.PSI_BOUNDED,
        psi_bound=psi_cap,
        lambda_inf_bound=lambda0,
        name="state_free",
        params=dict(lambda0=lambda0, psi_cap=psi_cap, mu=mu, sigma=sigma, gamma=gamma, x0=x0),
    )


def pure_diffusion(kappa: float = 1.0, sigma: float = 1.0, x0: float = 1.0) -> ModelSpec:
    """Ornstein-Uhlenbeck diffusion without jumps."""
    return ModelSpec(
        mu=lambda t, x: -kappa * x,
        sigma=_const(sigma),
        gamma=_const(0.0),
        nu=_const(0.0),
        lambda_inf=_const(0.0),
        psi=lambda u: 0.0,
        b=build_b("one"),
        mark_dist=PointMass(1.0),
        x0=x0,
        gronwall_case=GronwallCase.PSI_BOUNDED,
        psi_bound=0.0,
        lambda_inf_bound=0.0,
        name="pure_diffusion",
        params=dict(kappa=kappa, sigma=sigma, x0=x0),
    )


MODEL_BUILTINS: Dict[str, Callable[..., ModelSpec]] = {
    "jump_ou": jump_ou,
    "linear_hawkes": linear_hawkes,
    "poisson": poisson,
    "state_free": state_free,
    "pure_diffusion": pure_diffusion,
    "paper_hawkes_ou": jump_ou,
}


def get_model_names():
    return list(MODEL_BUILTINS)


def build_model(name: str, **params) -> ModelSpec:
    if name not in MODEL_BUILTINS:
        raise ConfigError(f"unknown model '{name}'. Available: {', '.join(MODEL_BUILTINS)}")
    try:
        model = MODEL_BUILTINS[name](**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for model '{name}': {exc}")
    logger.debug(f"Built model {name} with {model.params}")
    return model
