import numpy as np
import pytest
from scipy import stats

from hawkes_lift.common.errors import ConfigError, DomainError, DominationViolatedError, StabilityError
from hawkes_lift.hawkes_core import (
    EmpiricalMarks,
    ExponentialMarks,
    GronwallCase,
    ModelSpec,
    NoiseDriver,
    PointMass,
    TruncatedNormalMarks,
    build_marks,
    build_model,
    ensure_stable,
    estimate_moments,
    make_driver,
    simulate,
    simulate_paths,
    simulate_volterra,
)
from hawkes_lift.experiments import loglog_slope
from hawkes_lift.kernel import ExpSumKernel, build_kernel


def single_point_driver(t, dw=0.0, z=0.0):
    """One grid step on [0, 1] with a single candidate at t that is always accepted."""
    return NoiseDriver(
        seed=0,
        dt=1.0,
        horizon=1.0,
        lambda_max=2.0,
        times=np.array([0.0, 1.0]),
        brownian_increments=np.array([dw]),
        point_times=np.array([t]),
        point_thetas=np.array([0.0]),
        point_marks=np.array([1.0]),
        bridge_normals=np.array([z]),
    )


class TestNoiseDriver:
    def test_same_seed_same_noise(self, driver_factory):
        assert driver_factory(seed=7).fingerprint() == driver_factory(seed=7).fingerprint()
        assert driver_factory(seed=7).fingerprint() != driver_factory(seed=8).fingerprint()

    def test_brownian_path_does_not_depend_on_lambda_max(self, driver_factory):
        low = driver_factory(seed=3, lambda_max=2.0)
        high = driver_factory(seed=3, lambda_max=20.0)
        np.testing.assert_array_equal(low.brownian_increments, high.brownian_increments)

    def test_points_are_inside_the_box(self, driver_factory):
        driver = driver_factory(seed=11, horizon=5.0, lambda_max=4.0)
        assert np.all(np.diff(driver.point_times) >= 0)
        assert np.all((driver.point_times >= 0) & (driver.point_times <= 5.0))
        assert np.all((driver.point_thetas >= 0) & (driver.point_thetas <= 4.0))
        assert len(driver.poisson_points) == driver.n_points

    def test_arrays_are_read_only(self, driver_factory):
        driver = driver_factory()
        with pytest.raises(ValueError):
            driver.brownian_increments[0] = 1.0

    def test_grid_must_divide_horizon(self):
        with pytest.raises(DomainError, match="whole number"):
            make_driver(0, 0.3, 1.0, 5.0, PointMass())

    @pytest.mark.parametrize("args", [(0, 0.0, 1.0, 5.0), (0, 0.1, -1.0, 5.0), (0, 0.1, 1.0, 0.0), (-1, 0.1, 1.0, 5.0)])
    def test_invalid_arguments(self, args):
        with pytest.raises(DomainError):
            make_driver(*args, PointMass())

    def test_coarsening_keeps_the_brownian_path(self, driver_factory):
        fine = driver_factory(seed=5, dt=0.01, horizon=1.0)
        coarse = fine.coarsened(10)
        assert coarse.n_steps == 10
        assert coarse.dt == pytest.approx(0.1)
        assert coarse.brownian_increments.sum() == pytest.approx(fine.brownian_increments.sum())
        np.testing.assert_array_equal(coarse.point_times, fine.point_times)
        np.testing.assert_array_equal(coarse.bridge_normals, fine.bridge_normals)

    def test_bridge_stream_leaves_the_brownian_path_alone(self, driver_factory):
        driver = driver_factory(seed=6, dt=0.01, horizon=1.0, lambda_max=5.0)
        assert driver.bridge_normals.shape == driver.point_times.shape
        brownian_seq = np.random.SeedSequence(6).spawn(3)[0]
        expected = np.random.default_rng(brownian_seq).normal(0.0, np.sqrt(np.diff(driver.times)))
        np.testing.assert_array_equal(driver.brownian_increments, expected)


class TestMarks:
    def test_point_mass(self):
        assert PointMass(2.0).expectation(lambda y: y * y) == pytest.approx(4.0)

    def test_exponential_mean(self):
        assert ExponentialMarks(rate=2.0).expectation(lambda y: y) == pytest.approx(0.5, rel=1e-8)

    def test_truncated_normal_moments(self):
        marks = TruncatedNormalMarks(mean=1.0, sd=0.5)
        assert marks.expectation(lambda y: y) == pytest.approx(1.0, abs=1e-8)
        assert marks.expectation(lambda y: (y - 1.0) ** 2) == pytest.approx(0.25, rel=1e-6)

    def test_empirical_weights(self):
        nodes, weights = EmpiricalMarks(values=(1.0, 1.0, 3.0)).quadrature()
        np.testing.assert_allclose(nodes, [1.0, 3.0])
        np.testing.assert_allclose(weights, [2 / 3, 1 / 3])

    def test_samples_are_reproducible(self):
        marks = ExponentialMarks(rate=1.0)
        a = marks.sample(np.random.default_rng(4), 5)
        b = marks.sample(np.random.default_rng(4), 5)
        np.testing.assert_array_equal(a, b)

    def test_unknown_marks(self):
        with pytest.raises(ConfigError):
            build_marks("cauchy")

    def test_bad_rate(self):
        with pytest.raises(DomainError):
            ExponentialMarks(rate=0.0)


class TestModels:
    def test_psi_bounded_needs_a_bound(self):
        base = build_model("poisson")
        with pytest.raises(DomainError, match="psi_bound"):
            ModelSpec(
                mu=base.mu, sigma=base.sigma, gamma=base.gamma, nu=base.nu, lambda_inf=base.lambda_inf,
                psi=base.psi, b=base.b, mark_dist=base.mark_dist, gronwall_case=GronwallCase.PSI_BOUNDED,
            )

    def test_dominating_rate(self, jump_model, linear_model):
        assert jump_model.dominating_rate() == pytest.approx(8.0)
        assert linear_model.dominating_rate() is None

    def test_jump_ou_coefficients(self, jump_model):
        assert jump_model.gamma(0.0, 0.25) == pytest.approx(-40 * 0.25 / 2.0)
        assert jump_model.nu(0.0, 0.0) == pytest.approx(1.0)
        assert jump_model.psi(100.0) == pytest.approx(7.0)
        assert jump_model.psi(-3.0) == 0.0

    def test_hawkes_ou_alias(self, jump_model):
        alias = build_model("paper_hawkes_ou")
        for x in (-1.0, 0.0, 0.3, 2.0):
            assert alias.gamma(0.0, x) == jump_model.gamma(0.0, x)
            assert alias.nu(0.0, x) == jump_model.nu(0.0, x)
            assert alias.mu(0.0, x) == jump_model.mu(0.0, x)
        assert alias.dominating_rate() == jump_model.dominating_rate()

    def test_unknown_model(self):
        with pytest.raises(ConfigError, match="Available"):
            build_model("heston")

    def test_bad_model_parameter(self):
        with pytest.raises(ConfigError):
            build_model("poisson", intensity=3.0)


class TestSimulation:
    def test_poisson_accepts_exactly_the_points_below_the_rate(self):
        model = build_model("poisson", rate=2.0)
        driver = make_driver(21, 0.01, 5.0, 6.0, model.mark_dist)
        path = simulate(model, ExpSumKernel.zero(), driver)
        expected = np.nonzero(driver.point_thetas <= 2.0)[0]
        np.testing.assert_array_equal(path.accepted_indices(), expected)
        assert path.x_end == pytest.approx(len(expected))

    def test_euler_recursion_for_pure_diffusion(self):
        model = build_model("pure_diffusion", kappa=2.0, sigma=0.3, x0=1.0)
        driver = make_driver(2, 0.01, 1.0, 1e-9, model.mark_dist)
        assert driver.n_points == 0
        path = simulate_volterra(model, ExpSumKernel.zero(), driver)
        expected = [1.0]
        for dw in driver.brownian_increments:
            expected.append(expected[-1] * (1 - 2.0 * 0.01) + 0.3 * dw)
        np.testing.assert_allclose(path.x, expected, rtol=1e-12, atol=1e-12)
        assert path.n_jumps == 0

    @pytest.mark.parametrize("runner", [simulate, simulate_volterra])
    def test_state_is_advanced_to_the_candidate_time(self, runner):
        # dX = dt + X- dN with X0 = 1 and one accepted point at t = 0.5
        model = ModelSpec(
            mu=lambda t, x: 1.0,
            sigma=lambda t, x: 0.0,
            gamma=lambda t, x: x,
            nu=lambda t, x: 1.0,
            lambda_inf=lambda t, x: 1.0,
            psi=lambda u: 0.0,
            b=lambda y: 1.0,
            mark_dist=PointMass(1.0),
            x0=1.0,
            psi_bound=0.0,
            lambda_inf_bound=1.0,
        )
        path = runner(model, ExpSumKernel.zero(), single_point_driver(0.5))
        assert path.n_jumps == 1
        assert path.jumps.dx[0] == pytest.approx(1.5)
        assert path.x_end == pytest.approx(3.5)

    def test_candidate_sees_the_bridged_brownian_value(self):
        # X = W with X0 = 0; gamma(x) = x doubles the state at the jump
        model = ModelSpec(
            mu=lambda t, x: 0.0,
            sigma=lambda t, x: 1.0,
            gamma=lambda t, x: x,
            nu=lambda t, x: 1.0,
            lambda_inf=lambda t, x: 1.0,
            psi=lambda u: 0.0,
            b=lambda y: 1.0,
            mark_dist=PointMass(1.0),
            psi_bound=0.0,
            lambda_inf_bound=1.0,
        )
        path = simulate_volterra(model, ExpSumKernel.zero(), single_point_driver(0.25, dw=0.8, z=0.5))
        w_point = 0.25 * 0.8 + np.sqrt(0.25 * 0.75) * 0.5
        assert path.jumps.dx[0] == pytest.approx(w_point)
        assert path.x_end == pytest.approx(0.8 + w_point)

    def test_sub_steps_add_up_to_the_grid_increment(self, driver_factory):
        model = build_model("pure_diffusion", kappa=0.0, sigma=0.3, x0=1.0)
        driver = driver_factory(seed=4, dt=0.1, horizon=2.0, lambda_max=30.0, model=model)
        assert driver.n_points > 20
        path = simulate_volterra(model, ExpSumKernel.zero(), driver)
        np.testing.assert_allclose(path.x, 1.0 + 0.3 * path.w, atol=1e-12)
        assert path.candidates_evaluated == driver.n_points

    @pytest.mark.parametrize("multiplicative", [False, True])
    def test_refinement_error_shrinks_at_least_like_root_dt(self, multiplicative):
        if multiplicative:
            model = ModelSpec(
                mu=lambda t, x: 0.1 * x,
                sigma=lambda t, x: 0.4 * x,
                gamma=lambda t, x: -0.2 * x,
                nu=lambda t, x: 0.0,
                lambda_inf=lambda t, x: 1.0,
                psi=lambda u: 0.0,
                b=lambda y: 1.0,
                mark_dist=PointMass(1.0),
                x0=1.0,
                psi_bound=0.0,
                lambda_inf_bound=1.0,
            )
        else:
            model = build_model("pure_diffusion", kappa=2.0, sigma=0.5, x0=1.0)
        factors = (2, 4, 8, 16)
        errors = np.zeros(len(factors))
        for seed in range(20):
            fine = make_driver(seed, 1e-3, 1.0, 1.0, model.mark_dist)
            reference = simulate_volterra(model, ExpSumKernel.zero(), fine)
            for i, factor in enumerate(factors):
                coarse = simulate_volterra(model, ExpSumKernel.zero(), fine.coarsened(factor))
                errors[i] += np.max(np.abs(coarse.x - reference.x[::factor])) / 20
        assert np.all(np.diff(errors) > 0)
        assert loglog_slope([factor * 1e-3 for factor in factors], errors) >= 0.4

    def test_dominating_rate_bounds_every_intensity(self, jump_model, nonmonotone_kernel):
        rate = jump_model.dominating_rate()
        for seed in range(5):
            driver = make_driver(seed, 0.01, 10.0, rate, jump_model.mark_dist)
            path = simulate(jump_model, nonmonotone_kernel, driver)
            assert path.lam.max() <= rate

    def test_linear_hawkes_counts_events(self, linear_model, half_exponential, driver_factory):
        path = simulate_volterra(linear_model, half_exponential, driver_factory(seed=9, horizon=10.0, lambda_max=20.0))
        assert path.x_end == pytest.approx(path.n_jumps)
        assert np.all(path.lam >= 1.0)

    def test_intensity_jumps_by_eta_after_an_event(self, linear_model, half_exponential, driver_factory):
        path = simulate_volterra(linear_model, half_exponential, driver_factory(seed=9, horizon=10.0, lambda_max=20.0))
        assert path.n_jumps > 0
        first = path.jumps.times[0]
        k = int(np.searchsorted(path.times, first, side="left"))
        # one event so far, decayed since it happened
        if path.n_jumps == 1 or path.jumps.times[1] > path.times[k]:
            assert path.lam[k] == pytest.approx(1.0 + 0.5 * np.exp(-(path.times[k] - first)))

    def test_domination_violation_is_fatal(self, half_exponential):
        model = build_model("linear_hawkes", lambda0=5.0)
        driver = make_driver(0, 0.01, 1.0, 2.0, model.mark_dist)
        with pytest.raises(DominationViolatedError) as info:
            simulate(model, half_exponential, driver)
        assert info.value.exit_code == 4
        assert "at least 7" in str(info.value)

    def test_volterra_and_lifted_agree(self, jump_model, driver_factory):
        kernel = ExpSumKernel.from_ladder([-1.16, 2.17], 0.5)
        driver = driver_factory(seed=13, dt=0.01, horizon=5.0, lambda_max=9.0, model=jump_model)
        volterra = simulate_volterra(jump_model, kernel, driver)
        lifted = simulate(jump_model, kernel, driver)
        assert volterra.same_events(lifted)
        np.testing.assert_allclose(volterra.x, lifted.x, atol=1e-9)
        np.testing.assert_allclose(volterra.lam, lifted.lam, atol=1e-9)

    def test_threads_do_not_change_results(self, linear_model, half_exponential):
        serial = simulate_paths(linear_model, half_exponential, range(6), 0.05, 5.0, 20.0, threads=1)
        pooled = simulate_paths(linear_model, half_exponential, range(6), 0.05, 5.0, 20.0, threads=3)
        for a, b in zip(serial, pooled):
            np.testing.assert_array_equal(a.x, b.x)

    def test_linear_hawkes_mean_event_count(self, linear_model, half_exponential):
        # E N_T = 2T - 2(1 - e^{-T/2}) for lambda0 = 1, eta = 0.5, beta = 1
        paths = simulate_paths(linear_model, half_exponential, range(400), 0.05, 5.0, 25.0, threads=1)
        counts = np.array([p.x_end for p in paths])
        expected = 10.0 - 2.0 * (1.0 - np.exp(-2.5))
        se = counts.std(ddof=1) / np.sqrt(len(counts))
        assert abs(counts.mean() - expected) < 4 * se


class TestStabilityGate:
    def test_unstable_kernel_is_refused(self, jump_model, nonmonotone_kernel):
        with pytest.raises(StabilityError) as info:
            ensure_stable(jump_model, nonmonotone_kernel)
        assert info.value.exit_code == 2

    def test_unstable_kernel_can_be_allowed(self, jump_model, nonmonotone_kernel):
        ensure_stable(jump_model, nonmonotone_kernel, allow_unstable=True)

    def test_stable_kernel_passes(self, linear_model):
        ensure_stable(linear_model, build_kernel("power_law", c=0.5, p=2.5))


class TestPathRecord:
    def test_right_continuous_evaluation(self):
        model = build_model("poisson", rate=3.0)
        driver = make_driver(1, 0.1, 2.0, 3.0, model.mark_dist)
        path = simulate(model, ExpSumKernel.zero(), driver)
        assert path.n_jumps > 0
        t = path.jumps.times[0]
        assert path.x_at(t)[0] == pytest.approx(1.0)
        assert path.x_at(np.nextafter(t, -np.inf))[0] == pytest.approx(0.0)

    def test_frames(self, jump_model, driver_factory):
        kernel = ExpSumKernel.from_ladder([-1.16, 2.17], 0.5)
        path = simulate(jump_model, kernel, driver_factory(seed=2, horizon=2.0, lambda_max=9.0, model=jump_model))
        frame = path.to_frame()
        assert list(frame.columns) == ["t", "x", "lambda", "xi_1", "xi_2"]
        assert len(frame) == 201
        assert list(path.jumps_frame().columns) == ["t", "y", "dx"]


class TestMoments:
    def test_single_path_has_no_standard_error(self, linear_model, half_exponential):
        paths = simulate_paths(linear_model, half_exponential, [0], 0.05, 2.0, 20.0)
        summary = estimate_moments(paths)
        assert summary.n_paths == 1
        assert np.isnan(summary.sup_abs_x_p_se)

    def test_long_run_intensity_of_linear_hawkes(self, linear_model, half_exponential):
        paths = simulate_paths(linear_model, half_exponential, range(200), 0.05, 20.0, 30.0, threads=1)
        summary = estimate_moments(paths, p=2)
        # lambda0 / (1 - ||phi||_1) = 2, approached from below at rate e^{-t/2}
        assert summary.long_run_mean_lambda == pytest.approx(2.0, abs=4 * summary.long_run_mean_lambda_se + 0.02)
        assert summary.sup_mean_lambda_sq >= summary.sup_mean_lambda ** 2

    def test_mismatched_grids(self, linear_model, half_exponential):
        a = simulate_paths(linear_model, half_exponential, [0], 0.05, 2.0, 20.0)
        b = simulate_paths(linear_model, half_exponential, [0], 0.1, 2.0, 20.0)
        with pytest.raises(DomainError):
            estimate_moments(a + b)

    def test_moment_order(self, linear_model, half_exponential):
        paths = simulate_paths(linear_model, half_exponential, [0, 1], 0.05, 1.0, 20.0)
        with pytest.raises(DomainError):
            estimate_moments(paths, p=0.5)


class TestThinningCalibration:
    @staticmethod
    def run(n_seeds, horizon):
        model = build_model("poisson", rate=1.0)
        paths = simulate_paths(model, ExpSumKernel.zero(), range(n_seeds), 0.1, horizon, 1.5, threads=1)
        counts = np.array([p.n_jumps for p in paths])
        gaps = np.concatenate([np.diff(np.concatenate([[0.0], p.jumps.times])) for p in paths])
        return counts, gaps

    def test_unit_rate_counts_and_gaps(self):
        counts, gaps = self.run(300, 20.0)
        se = counts.std(ddof=1) / np.sqrt(len(counts))
        assert abs(counts.mean() - 20.0) < 4 * se
        assert stats.kstest(gaps, "expon").pvalue > 1e-3

    @pytest.mark.slow
    def test_unit_rate_acceptance(self):
        counts, gaps = self.run(10_000, 100.0)
        assert abs(counts.mean() - 100.0) < 3 * np.sqrt(100.0 / len(counts))
        assert stats.kstest(gaps, "expon").pvalue > 1e-3


@pytest.mark.slow
class TestLinearHawkesMomentOracle:
    def test_bound_and_stationary_mean(self, linear_model, half_exponential):
        from hawkes_lift.diagnostics import intensity_bound

        paths = simulate_paths(linear_model, half_exponential, range(10_000), 0.01, 50.0, 40.0)
        summary = estimate_moments(paths)
        assert summary.sup_mean_lambda <= intensity_bound(linear_model, half_exponential) + 3 * summary.sup_mean_lambda_se
        assert abs(summary.long_run_mean_lambda - 2.0) < 3 * summary.long_run_mean_lambda_se
