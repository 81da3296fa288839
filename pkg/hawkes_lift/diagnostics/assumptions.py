"""Sampled checks of the standing assumptions and the stability condition.

Lipschitz constants of black-box coefficients are estimated by the largest
divided difference over a deterministic grid, so they are lower bounds.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from hawkes_lift.common.logging import get_logger
from hawkes_lift.hawkes_core.model import GronwallCase, ModelSpec
from hawkes_lift.kernel.quadrature import l1_norm
from hawkes_lift.kernel.base import Kernel

logger = get_logger(__name__)

THRESHOLD_BAND = 0.05


class Verdict(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    UNKNOWN = "UNKNOWN"


def below(value: float, threshold: float) -> Verdict:
    """PASS if clearly below, FAIL if clearly above, UNKNOWN within 5% of the threshold."""
    if not np.isfinite(value):
        return Verdict.UNKNOWN
    margin = THRESHOLD_BAND * abs(threshold)
    if value < threshold - margin:
        return Verdict.PASS
    if value > threshold + margin:
        return Verdict.FAIL
    return Verdict.UNKNOWN


def combine(*verdicts: Verdict) -> Verdict:
    if Verdict.FAIL in verdicts:
        return Verdict.FAIL
    if Verdict.UNKNOWN in verdicts:
        return Verdict.UNKNOWN
    return Verdict.PASS


def _flag(ok: bool) -> Verdict:
    return Verdict.PASS if ok else Verdict.FAIL


@dataclass(frozen=True)
class SamplingBox:
    t_range: Tuple[float, float] = (0.0, 10.0)
    x_range: Tuple[float, float] = (-5.0, 5.0)
    u_range: Tuple[float, float] = (-10.0, 10.0)
    n_t: int = 11
    n_x: int = 201
    n_u: int = 401

    def t_grid(self) -> np.ndarray:
        return np.linspace(*self.t_range, self.n_t)

    def x_grid(self) -> np.ndarray:
        return np.linspace(*self.x_range, self.n_x)

    def u_grid(self) -> np.ndarray:
        return np.linspace(*self.u_range, self.n_u)


def _table(func, t_grid: np.ndarray, x_grid: np.ndarray) -> np.ndarray:
    return np.array([[float(func(t, x)) for x in x_grid] for t in t_grid])


def _lipschitz(values: np.ndarray, grid: np.ndarray) -> float:
    """Largest divided difference along the last axis."""
    slopes = np.abs(np.diff(values, axis=-1)) / np.diff(grid)
    return float(np.max(slopes)) if slopes.size else 0.0


@dataclass
class AssumptionReport:
    model_name: str
    kernel_name: str
    box: SamplingBox
    lipschitz_estimates: Dict[str, float]
    L_lambda: float
    L_psi: float
    Eb: float
    phi_l1: float
    stability_product: float
    lambda_bar: float
    psi0: float
    nu_sup: float
    psi_nonnegative: bool
    psi_monotone: bool
    lambda_inf_nonnegative: bool
    gronwall_ok: bool
    gronwall_case: GronwallCase
    verdicts: Dict[str, Verdict] = field(default_factory=dict)

    @property
    def stability(self) -> Verdict:
        return self.verdicts["stability"]

    @property
    def baseline(self) -> float:
        """lambda_bar + psi(0), the effective baseline of the first-moment bound."""
        return self.lambda_bar + self.psi0

    @property
    def verdict(self) -> Verdict:
        return combine(*self.verdicts.values())

    @property
    def exit_code(self) -> int:
        return {Verdict.PASS: 0, Verdict.FAIL: 2, Verdict.UNKNOWN: 3}[self.verdict]

    def to_rows(self) -> List[Tuple[str, object]]:
        rows: List[Tuple[str, object]] = [
            ("model", self.model_name),
            ("kernel", self.kernel_name),
            ("t_range", f"[{self.box.t_range[0]}, {self.box.t_range[1]}]"),
            ("x_range", f"[{self.box.x_range[0]}, {self.box.x_range[1]}]"),
            ("u_range", f"[{self.box.u_range[0]}, {self.box.u_range[1]}]"),
        ]
        rows += [(f"lipschitz_{name}", value) for name, value in self.lipschitz_estimates.items()]
        rows += [
            ("L_lambda", self.L_lambda),
            ("L_psi", self.L_psi),
            ("Eb", self.Eb),
            ("phi_l1", self.phi_l1),
            ("stability_product", self.stability_product),
            ("lambda_bar", self.lambda_bar),
            ("psi0", self.psi0),
            ("baseline", self.baseline),
            ("nu_sup", self.nu_sup),
            ("psi_nonnegative", self.psi_nonnegative),
            ("psi_monotone", self.psi_monotone),
            ("lambda_inf_nonnegative", self.lambda_inf_nonnegative),
            ("gronwall_case", self.gronwall_case.value),
            ("gronwall_ok", self.gronwall_ok),
        ]
        rows += [(f"verdict_{name}", v.value) for name, v in self.verdicts.items()]
        rows.append(("verdict", self.verdict.value))
        return rows

    def render_text(self) -> str:
        rows = self.to_rows()
        width = max(len(key) for key, _ in rows)
        lines = []
        for key, value in rows:
            if isinstance(value, float):
                value = f"{value:.6g}"
            elif isinstance(value, bool):
                value = "yes" if value else "no"
            lines.append(f"{key.ljust(width)}  {value}")
        return "\n".join(lines)


def check_assumptions(model: ModelSpec, kernel: Kernel, box: Optional[SamplingBox] = None) -> AssumptionReport:
    """Report-only verification of the standing assumptions on a sampling box."""
    box = box or SamplingBox()
    t_grid, x_grid, u_grid = box.t_grid(), box.x_grid(), box.u_grid()

    coefficients = {
        "mu": model.mu,
        "sigma": model.sigma,
        "gamma": model.gamma,
        "nu": model.nu,
        "lambda_inf": model.lambda_inf,
    }
    tables = {name: _table(func, t_grid, x_grid) for name, func in coefficients.items()}
    lipschitz = {name: _lipschitz(values, x_grid) for name, values in tables.items()}

    psi_values = np.array([float(model.psi(u)) for u in u_grid])
    L_psi = _lipschitz(psi_values, u_grid)
    L_lambda = lipschitz["lambda_inf"]
    Eb = model.mark_dist.expectation(lambda y: abs(model.b(y)))
    phi_l1 = l1_norm(kernel)
    product = L_psi * Eb * phi_l1

    psi_nonnegative = bool(np.all(psi_values >= 0.0))
    psi_monotone = bool(np.all(np.diff(psi_values) >= -1e-12))
    lambda_inf_nonnegative = bool(np.all(tables["lambda_inf"] >= 0.0))
    nu_sup = float(np.max(np.abs(tables["nu"])))
    lambda_bar = float(np.max(tables["lambda_inf"]))
    psi0 = float(model.psi(0.0))

    if model.gronwall_case is GronwallCase.PSI_BOUNDED:
        gronwall_ok = bool(np.max(psi_values) <= model.psi_bound + 1e-12)
    else:
        spread = [np.ptp(tables[name], axis=1).max() for name in ("gamma", "nu")]
        gronwall_ok = bool(max(spread) <= 1e-12)

    verdicts = {
        "baseline_nonnegative": _flag(lambda_inf_nonnegative),
        "baseline_lipschitz": below(L_lambda, 1.0),
        "psi_admissible": _flag(psi_nonnegative and psi_monotone),
        "nu_bounded": _flag(nu_sup <= 1.0 + 1e-12),
        "stability": below(product, 1.0),
        "gronwall": _flag(gronwall_ok),
    }
    if L_lambda >= 1.0:
        logger.warning(f"⚠️ Sampled Lipschitz constant of lambda_inf is {L_lambda:.4g} >= 1")

    report = AssumptionReport(
        model_name=model.name,
        kernel_name=kernel.name,
        box=box,
        lipschitz_estimates=lipschitz,
        L_lambda=L_lambda,
        L_psi=L_psi,
        Eb=Eb,
        phi_l1=phi_l1,
        stability_product=product,
        lambda_bar=lambda_bar,
        psi0=psi0,
        nu_sup=nu_sup,
        psi_nonnegative=psi_nonnegative,
        psi_monotone=psi_monotone,
        lambda_inf_nonnegative=lambda_inf_nonnegative,
        gronwall_ok=gronwall_ok,
        gronwall_case=model.gronwall_case,
        verdicts=verdicts,
    )
    logger.debug(f"Assumption check {model.name}/{kernel.name}: product={product:.4g}, verdict={report.verdict.value}")
    return report
