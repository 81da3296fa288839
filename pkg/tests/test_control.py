import math

import numpy as np
import pytest

from hawkes_lift.common.errors import DomainError, HorizonTooShortError
from hawkes_lift.control import (
    MarketSpec,
    constant_policy,
    hamiltonian,
    market_model,
    merton_value,
    optimal_policy,
    policy_simulation_value,
    psi_hat,
    psi_hat_array,
    tail_bound,
    value_closed_form,
)
from hawkes_lift.control.market import consumption_constant
from hawkes_lift.kernel import ExpSumKernel, fit_l2
from hawkes_lift.kernel.builtins import exponential, power_law


def make_market(kernel=None, **overrides):
    params = dict(mu=0.08, r=0.03, sigma=0.2, gamma_jump=-0.1, rho=0.2, x0_wealth=1.0, lambda0=0.3, lambda_cap=50.0)
    params.update(overrides)
    return MarketSpec(kernel=kernel if kernel is not None else exponential(eta=0.5, beta=1.0), **params)


class TestHamiltonian:
    @pytest.mark.parametrize("lam", [0.0, 0.1, 0.3, 0.45, 1.0, 5.0])
    def test_matches_a_brute_force_maximum(self, lam):
        mkt = make_market()
        grid = np.linspace(0.0, 1.0, 200001)
        brute = hamiltonian(grid, lam, mkt)
        result = psi_hat(lam, mkt)
        assert result.value == pytest.approx(mkt.K * brute.max(), abs=1e-9)
        assert result.omega == pytest.approx(grid[np.argmax(brute)], abs=1e-4)

    def test_known_corners(self):
        mkt = make_market()
        # no jumps: omega* = min((mu - r)/sigma^2, 1) = 1
        assert psi_hat(0.0, mkt).omega == pytest.approx(1.0)
        assert psi_hat(0.0, mkt).value == pytest.approx(0.03 / 0.2)
        # h'(0) = mu - r + lam gamma <= 0
        assert psi_hat(1.0, mkt).omega == 0.0
        assert psi_hat(1.0, mkt).value == 0.0

    def test_vectorised_agrees_with_scalar(self):
        mkt = make_market(gamma_jump=0.2)
        lam = np.linspace(0.0, 3.0, 31)
        batch = psi_hat_array(lam, mkt)
        scalar = [psi_hat(float(v), mkt) for v in lam]
        np.testing.assert_allclose(batch.value, [s.value for s in scalar], atol=1e-14)
        np.testing.assert_allclose(batch.omega, [s.omega for s in scalar], atol=1e-14)

    def test_downward_jumps_lower_the_value(self):
        values = psi_hat_array(np.linspace(0.0, 2.0, 41), make_market()).value
        assert np.all(np.diff(values) <= 1e-15)

    @pytest.mark.parametrize("gamma_jump,direction", [(-0.1, -1), (0.2, 1)])
    def test_optimal_fraction_is_monotone_in_the_intensity(self, gamma_jump, direction):
        omega = psi_hat_array(np.linspace(0.0, 5.0, 101), make_market(gamma_jump=gamma_jump, mu=0.05)).omega
        assert np.all(direction * np.diff(omega) >= -1e-12)
        assert omega[0] != omega[-1]

    def test_no_jump_size(self):
        mkt = make_market(gamma_jump=0.0, mu=0.05)
        assert psi_hat(3.0, mkt).omega == pytest.approx(0.5)

    def test_negative_intensity(self):
        with pytest.raises(DomainError):
            psi_hat(-1.0, make_market())

    @pytest.mark.parametrize("field,value", [("gamma_jump", -1.0), ("rho", 0.0), ("x0_wealth", -1.0), ("lambda_cap", 0.1)])
    def test_invalid_market(self, field, value):
        with pytest.raises(DomainError):
            make_market(**{field: value})


class TestMarketModel:
    def test_intensity_is_capped(self):
        mkt = make_market(lambda_cap=2.0)
        model = market_model(mkt)
        assert model.psi(0.0) == pytest.approx(0.3)
        assert model.psi(10.0) == pytest.approx(2.0)
        assert model.psi(-10.0) == 0.0
        assert model.dominating_rate() == pytest.approx(2.0)
        np.testing.assert_allclose(mkt.intensity([0.0, 10.0, -10.0]), [0.3, 2.0, 0.0])


class TestClosedFormValue:
    def test_tail_bound(self):
        mkt = make_market()
        assert tail_bound(mkt, 10.0) == pytest.approx(math.exp(-2.0) * 0.15 / 0.2)

    def test_horizon_too_short(self):
        with pytest.raises(HorizonTooShortError) as info:
            value_closed_form(make_market(), 5.0, 10, 0)
        needed = info.value.needed_horizon
        assert tail_bound(make_market(), needed) == pytest.approx(1e-3, rel=1e-6)

    def test_zero_kernel_is_deterministic(self):
        mkt = make_market(kernel=ExpSumKernel.zero(), lambda0=0.0)
        result = value_closed_form(mkt, 40.0, 10, 0)
        assert result.se == 0.0
        assert abs(result.v0n - merton_value(mkt)) <= result.tail_bound + 1e-12
        assert result.constant == pytest.approx(consumption_constant(mkt))

    def test_monte_carlo_value_is_bracketed(self):
        mkt = make_market()
        result = value_closed_form(mkt, 35.0, 50, seed0=0, dt=0.05, threads=1)
        assert result.se > 0
        assert result.constant <= result.v0n <= result.constant + 0.15 / 0.2
        assert result.tail_bound <= 1e-3

    def test_needs_an_exponential_sum(self):
        with pytest.raises(TypeError):
            value_closed_form(make_market(kernel=power_law()), 40.0, 10, 0)


class TestPolicySimulation:
    def test_consume_everything_at_rho_and_stay_in_cash(self):
        mkt = make_market(x0_wealth=2.0)
        result = policy_simulation_value(mkt, constant_policy(c=0.2, omega=0.0), 40.0, 5, seed0=0, dt=0.01)
        assert result.se == 0.0
        assert result.value == pytest.approx(consumption_constant(mkt), abs=1e-5)

    def test_consuming_at_rho_beats_half_and_double(self):
        # same drivers: only log c - c t depends on c, so the gaps are (log 2 - 1/2) / rho and (1 - log 2) / rho
        mkt = make_market()
        value = {
            c: policy_simulation_value(mkt, constant_policy(c=c, omega=0.5), 40.0, 20, seed0=0, dt=0.05, threads=1).value
            for c in (0.1, 0.2, 0.4)
        }
        assert value[0.2] - value[0.1] == pytest.approx((math.log(2.0) - 0.5) / 0.2, rel=1e-3)
        assert value[0.2] - value[0.4] == pytest.approx((1.0 - math.log(2.0)) / 0.2, rel=1e-3)

    def test_merton_value_without_jump_losses(self):
        mkt = make_market(gamma_jump=0.0)
        result = policy_simulation_value(mkt, optimal_policy(mkt), 40.0, 400, seed0=0, dt=0.01, threads=1)
        assert result.se > 0
        assert abs(result.value - merton_value(mkt)) <= 3 * result.se

    def test_invalid_controls(self):
        mkt = make_market()
        with pytest.raises(DomainError):
            policy_simulation_value(mkt, constant_policy(c=0.0, omega=0.5), 1.0, 1, 0)
        with pytest.raises(DomainError):
            policy_simulation_value(mkt, constant_policy(c=0.2, omega=1.5), 1.0, 1, 0)

    def test_general_kernels_are_simulated_by_history(self):
        mkt = make_market(kernel=power_law(c=0.3, p=3.0), lambda_cap=20.0)
        result = policy_simulation_value(mkt, optimal_policy(mkt), 5.0, 3, seed0=0, dt=0.05, threads=1)
        assert np.isfinite(result.value)

    @pytest.mark.slow
    def test_optimal_policy_matches_the_closed_form(self):
        mkt = make_market()
        closed = value_closed_form(mkt, 45.0, 2000, seed0=0)
        simulated = policy_simulation_value(mkt, optimal_policy(mkt), 45.0, 2000, seed0=0)
        tolerance = 3 * math.hypot(closed.se, simulated.se) + closed.tail_bound
        assert abs(closed.v0n - simulated.value) <= tolerance

    @pytest.mark.slow
    def test_suboptimal_fraction_does_worse(self):
        mkt = make_market()
        optimal = policy_simulation_value(mkt, optimal_policy(mkt), 45.0, 2000, seed0=0)
        other = policy_simulation_value(mkt, constant_policy(c=0.2, omega=0.2), 45.0, 2000, seed0=0)
        assert other.value < optimal.value

    @pytest.mark.slow
    def test_fitted_kernels_approach_the_target_value(self):
        target = power_law(c=0.5, p=2.5)
        results = [
            value_closed_form(make_market(kernel=fit_l2(target, n, 0.5).kernel), 45.0, 1000, seed0=0)
            for n in (1, 2, 3, 4)
        ]
        values = np.array([r.v0n for r in results])
        se = np.array([r.se for r in results])
        gaps = np.abs(np.diff(values))
        gap_se = np.hypot(se[:-1], se[1:])
        for k in range(len(gaps) - 1):
            assert gaps[k + 1] <= gaps[k] + 2 * np.hypot(gap_se[k], gap_se[k + 1])
