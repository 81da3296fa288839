from dataclasses import replace

import numpy as np
import pytest

from hawkes_lift.common.errors import DivergentSeriesError, DomainError
from hawkes_lift.diagnostics import SamplingBox, Verdict, check_assumptions, intensity_bound, resolvent
from hawkes_lift.diagnostics.assumptions import below, combine
from hawkes_lift.diagnostics.resolvent import trapezoid_convolution
from hawkes_lift.hawkes_core import GronwallCase
from hawkes_lift.kernel import ExpSumKernel
from hawkes_lift.kernel.builtins import exponential, power_law


class TestVerdicts:
    @pytest.mark.parametrize(
        "value,expected",
        [(0.5, Verdict.PASS), (0.96, Verdict.UNKNOWN), (1.04, Verdict.UNKNOWN), (1.2, Verdict.FAIL), (np.nan, Verdict.UNKNOWN)],
    )
    def test_threshold_band(self, value, expected):
        assert below(value, 1.0) is expected

    def test_combine(self):
        assert combine(Verdict.PASS, Verdict.PASS) is Verdict.PASS
        assert combine(Verdict.PASS, Verdict.UNKNOWN) is Verdict.UNKNOWN
        assert combine(Verdict.UNKNOWN, Verdict.FAIL) is Verdict.FAIL


class TestCheckAssumptions:
    def test_stable_linear_hawkes(self, linear_model, half_exponential):
        report = check_assumptions(linear_model, half_exponential)
        assert report.stability_product == pytest.approx(0.5, rel=1e-6)
        assert report.verdict is Verdict.PASS
        assert report.exit_code == 0
        assert report.baseline == pytest.approx(1.0)

    def test_jump_ou_with_nonmonotone_kernel_is_unstable(self, jump_model, nonmonotone_kernel):
        report = check_assumptions(jump_model, nonmonotone_kernel)
        assert report.L_psi == pytest.approx(1.0)
        assert report.Eb == pytest.approx(1.0)
        assert report.phi_l1 == pytest.approx(1.45, abs=0.01)
        assert report.stability is Verdict.FAIL
        assert report.exit_code == 2
        assert report.lipschitz_estimates["gamma"] > 30.0
        assert report.gronwall_ok

    def test_near_threshold_is_unknown(self, linear_model):
        report = check_assumptions(linear_model, exponential(eta=0.98, beta=1.0))
        assert report.stability is Verdict.UNKNOWN
        assert report.exit_code == 3

    def test_state_free_case_needs_constant_jump_coefficients(self, jump_model, half_exponential):
        model = replace(jump_model, gronwall_case=GronwallCase.STATE_FREE)
        report = check_assumptions(model, half_exponential)
        assert not report.gronwall_ok
        assert report.verdicts["gronwall"] is Verdict.FAIL

    def test_custom_box(self, jump_model, half_exponential):
        box = SamplingBox(x_range=(-1.0, 1.0), n_x=21)
        report = check_assumptions(jump_model, half_exponential, box)
        assert report.box.x_range == (-1.0, 1.0)

    def test_report_rendering(self, linear_model, half_exponential):
        report = check_assumptions(linear_model, half_exponential)
        keys = [key for key, _ in report.to_rows()]
        assert keys[-1] == "verdict"
        assert "verdict_stability" in keys
        text = report.render_text()
        assert "stability_product" in text
        assert "PASS" in text


class TestResolvent:
    def test_exponential_closed_form(self, half_exponential):
        q = resolvent(half_exponential, 1e-3, 20.0)
        np.testing.assert_allclose(q.values, 0.5 * np.exp(-0.5 * q.times), atol=1e-6)
        assert q(1.0) == pytest.approx(0.5 * np.exp(-0.5), abs=1e-6)

    def test_integral_matches_the_norm(self, half_exponential):
        # ||phi||_1 / (1 - ||phi||_1)
        assert resolvent(half_exponential, 1e-3, 40.0).integral() == pytest.approx(1.0, abs=1e-5)

    def test_renewal_equation(self):
        q = resolvent(power_law(c=0.4, p=3.0), 1e-2, 20.0)
        assert q.renewal_residual() < 1e-8
        assert q.terms > 5

    def test_divergent_series(self, nonmonotone_kernel):
        with pytest.raises(DivergentSeriesError):
            resolvent(nonmonotone_kernel, 1e-2, 10.0)

    def test_bad_grid(self, half_exponential):
        with pytest.raises(DomainError):
            resolvent(half_exponential, 1.0, 0.5)

    def test_convolution_is_symmetric(self):
        times = np.arange(0, 5.0001, 0.01)
        a, b = np.exp(-times), np.cos(times)
        np.testing.assert_allclose(
            trapezoid_convolution(a, b, 0.01), trapezoid_convolution(b, a, 0.01), atol=1e-12
        )

    def test_convolution_of_exponentials(self):
        times = np.arange(0, 5.0001, 1e-3)
        conv = trapezoid_convolution(np.exp(-times), np.exp(-2 * times), 1e-3)
        np.testing.assert_allclose(conv, np.exp(-times) - np.exp(-2 * times), atol=1e-5)


class TestIntensityBound:
    def test_linear_hawkes(self, linear_model, half_exponential):
        assert intensity_bound(linear_model, half_exponential) == pytest.approx(2.0, rel=1e-6)

    def test_zero_kernel_gives_the_baseline(self, linear_model):
        assert intensity_bound(linear_model, ExpSumKernel.zero()) == pytest.approx(1.0)

    def test_unstable_model(self, jump_model, nonmonotone_kernel):
        with pytest.raises(DomainError, match="stability"):
            intensity_bound(jump_model, nonmonotone_kernel)

    @pytest.mark.slow
    def test_bound_dominates_simulated_mean(self, linear_model):
        from hawkes_lift.hawkes_core import estimate_moments, simulate_paths

        kernel = power_law(c=0.5, p=2.5)
        paths = simulate_paths(linear_model, kernel, range(300), 0.05, 20.0, 40.0)
        summary = estimate_moments(paths)
        assert summary.sup_mean_lambda <= intensity_bound(linear_model, kernel) + 3 * summary.sup_mean_lambda_se
