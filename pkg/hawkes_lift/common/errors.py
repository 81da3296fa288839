"""Exception hierarchy shared by every hawkes_lift module.

Each exception carries the exit code the CLI reports for it.
"""

import math


class HawkesLiftError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class ConfigError(HawkesLiftError):
    """Invalid or incomplete run configuration."""


class DomainError(HawkesLiftError, ValueError):
    """An operation was called outside its precondition."""


class InvalidKernelError(HawkesLiftError, ValueError):
    """Kernel definition or samples are not usable (non-finite, bad rates)."""


class IllConditionedError(HawkesLiftError):
    """The modified Hilbert system is too ill-conditioned to solve."""

    def __init__(self, condition: float, threshold: float):
        self.condition = condition
        self.threshold = threshold
        super().__init__(
            f"Hilbert matrix condition number {condition:.3e} exceeds the "
            f"threshold {threshold:.3e}; lower n or change beta"
        )


class NumericError(HawkesLiftError, ArithmeticError):
    """NaN coefficients, negative intensities or failed quadrature."""


class DivergentSeriesError(HawkesLiftError):
    """The resolvent Neumann series does not converge (||phi||_1 >= 1)."""


class HorizonTooShortError(HawkesLiftError):
    """Truncated infinite-horizon integral has a tail above tolerance."""

    def __init__(self, tail_bound: float, tolerance: float, needed_horizon: float):
        self.tail_bound = tail_bound
        self.tolerance = tolerance
        self.needed_horizon = needed_horizon
        super().__init__(
            f"tail bound {tail_bound:.3e} exceeds tolerance {tolerance:.3e}; "
            f"use horizon_trunc >= {needed_horizon:.4g}"
        )


class DominationViolatedError(HawkesLiftError):
    """Runtime intensity exceeded the dominating Poisson rate."""

    exit_code = 4

    def __init__(self, t: float, intensity: float, lambda_max: float):
        self.t = t
        self.intensity = intensity
        self.lambda_max = lambda_max
        super().__init__(
            f"intensity {intensity:.6g} exceeds lambda_max {lambda_max:.6g} at t={t:.6g}; "
            f"simulation invalid, increase lambda_max to at least {advise_lambda_max(intensity)}"
        )


def advise_lambda_max(intensity: float) -> float:
    """Suggested dominating rate after a violation: 25% headroom, rounded up."""
    return float(math.ceil(1.25 * intensity))


class StabilityError(HawkesLiftError):
    """The stability condition fails and the run was not explicitly allowed."""

    exit_code = 2


class RejectedPathsError(HawkesLiftError):
    """Too many coupled paths had to be re-seeded after domination violations."""

    exit_code = 4

    def __init__(self, rejected: int, n_paths: int):
        self.rejected = rejected
        self.n_paths = n_paths
        super().__init__(
            f"{rejected} of {n_paths} paths were rejected for domination violations "
            f"(limit 1%); increase lambda_max"
        )
