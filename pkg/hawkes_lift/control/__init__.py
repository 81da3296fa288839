from .market import (
    MarketSpec,
    PsiHat,
    hamiltonian,
    market_model,
    merton_value,
    psi_hat,
    psi_hat_array,
)
from .policy import Policy, PolicyState, SimulatedValue, constant_policy, optimal_policy, policy_simulation_value
from .value import ClosedFormValue, tail_bound, value_closed_form
