"""
hawkes_lift commands

One class per CLI subcommand. Each command reads the blocks it needs from a
validated RunConfig, writes its files under the output directory and returns
the process exit code.
"""

import os
import sys
from abc import ABC, abstractmethod
from typing import Dict, List, Tuple

import numpy as np
import pandas as pd

from hawkes_lift.common.csv_io import MISSING, write_key_values, write_table
from hawkes_lift.common.errors import ConfigError
from hawkes_lift.common.logging import get_logger
from hawkes_lift.config import RunConfig

logger = get_logger(__name__)


class BaseCommand(ABC):
    """Base class for all commands."""

    name = ""
    description = ""
    required_blocks: Tuple[str, ...] = ()

    def __init__(self, config: RunConfig):
        self.config = config
        for block in self.required_blocks:
            config.require(block)
        self.out_dir = config.run.out

    def output(self, filename: str) -> str:
        return os.path.join(self.out_dir, filename)

    def driver_metadata(self) -> Dict[str, object]:
        driver = self.config.driver
        return {
            "config": self.config.name,
            "model": self.config.model.name if self.config.model else MISSING,
            "kernel": self.config.kernel.name if self.config.kernel else MISSING,
            "seed": driver.seed,
            "dt": driver.dt,
            "horizon": driver.horizon,
        }

    @abstractmethod
    def run(self) -> int:
        """Execute the command and return its exit code."""


class FitKernelCommand(BaseCommand):
    """Fit exponential sums to the configured kernel (fit.csv, kernel_curves.csv)."""

    name = "fit-kernel"
    description = "fit n-exponential approximations of the kernel; writes fit.csv and kernel_curves.csv"
    required_blocks = ("kernel", "fit")

    def run(self) -> int:
        from hawkes_lift.kernel.fitting import fit_ladder

        block = self.config.blocks["fit"]
        kernel = self.config.kernel
        fit_kwargs = block.fit_kwargs()
        fits = fit_ladder(kernel, block.n_list, block.beta, method=block.method, **fit_kwargs)

        max_n = max(f.n for f in fits)
        meta = {"config": self.config.name, "kernel": kernel.name, "beta": block.beta, "method": block.method}
        if "window" in fit_kwargs:
            meta["window"] = fit_kwargs["window"]
        write_table(self.output("fit.csv"), pd.DataFrame([f.to_row(max_n) for f in fits]), meta)

        n_points = int(round(block.curve_horizon / block.curve_step)) + 1
        times = np.linspace(0.0, block.curve_horizon, n_points)
        curves = pd.DataFrame({"t": times, "phi": np.asarray(kernel(times), dtype=float)})
        for f in fits:
            curves[f"phi_n{f.n}"] = f.kernel(times)
        write_table(self.output("kernel_curves.csv"), curves, meta)
        logger.info(f"✅ Wrote {len(fits)} fits to {self.out_dir}")
        return 0


class SimulateCommand(BaseCommand):
    """Simulate the kernel and its fits on one shared driver."""

    name = "simulate"
    description = "simulate one path per kernel on a shared driver; writes path, jump and Poisson point files"
    required_blocks = ("model", "kernel")

    def kernels(self) -> List[Tuple[str, object]]:
        from hawkes_lift.kernel.fitting import fit

        block = self.config.blocks.get("simulate")
        kernels = []
        if block is None or block.include_target:
            kernels.append(("target", self.config.kernel))
        for n in block.fit_orders if block else []:
            result = fit(self.config.kernel, n, block.beta, method=block.method, **block.fit_kwargs())
            kernels.append((f"n{n}", result.kernel))
        return kernels

    def scan_seed(self, kernels: List[Tuple[str, object]], lambda_max: float) -> None:
        """Move the driver seed to the first one where the largest fit follows the target and the smallest does not."""
        from hawkes_lift.experiments.study import find_reproduction_seed

        block, driver_block = self.config.blocks["simulate"], self.config.driver
        by_label = dict(kernels)
        orders = sorted(block.fit_orders)
        if "target" not in by_label or len(orders) < 2:
            raise ConfigError(f"{self.config.name}: [simulate] seed_scan needs include_target and two fit_orders")
        seeds = range(driver_block.seed, driver_block.seed + block.seed_scan)
        found = find_reproduction_seed(
            self.config.model, by_label["target"], by_label[f"n{orders[-1]}"], by_label[f"n{orders[0]}"],
            seeds, driver_block.dt, driver_block.horizon, lambda_max, threads=self.config.run.threads,
        )
        if found is None:
            logger.warning(f"⚠️ Keeping seed {driver_block.seed}: no seed in [{seeds.start}, {seeds.stop}) separates the fits")
            return
        self.config.driver = driver_block.model_copy(update={"seed": found})

    def run(self) -> int:
        from hawkes_lift.hawkes_core.driver import make_driver
        from hawkes_lift.hawkes_core.simulation import ensure_stable, simulate

        model = self.config.model
        lambda_max = self.config.lambda_max()
        block = self.config.blocks.get("simulate")
        kernels = self.kernels()
        for _, kernel in kernels:
            ensure_stable(model, kernel, self.config.driver.allow_unstable)
        if block is not None and block.seed_scan:
            self.scan_seed(kernels, lambda_max)
        driver_block = self.config.driver
        driver = make_driver(driver_block.seed, driver_block.dt, driver_block.horizon, lambda_max, model.mark_dist)
        meta = {**self.driver_metadata(), "lambda_max": lambda_max}

        points = pd.DataFrame({"t": driver.point_times, "theta": driver.point_thetas, "y": driver.point_marks})
        write_table(self.output("poisson_points.csv"), points, meta)
        for label, kernel in kernels:
            path = simulate(model, kernel, driver)
            frame = path.to_frame()
            if block is not None and block.write_brownian:
                frame["w"] = path.w
            kernel_meta = {**meta, "kernel": kernel.name, "jumps": path.n_jumps}
            write_table(self.output(f"path_{label}.csv"), frame, kernel_meta)
            write_table(self.output(f"jumps_{label}.csv"), path.jumps_frame(), kernel_meta)
            logger.info(f"Kernel {label}: {path.n_jumps} accepted of {driver.n_points} candidates")
        return 0


class CheckCommand(BaseCommand):
    """Check the standing assumptions; exit 0 pass, 2 fail, 3 unknown."""

    name = "check"
    description = "check the model assumptions and stability condition; exit 0 pass, 2 fail, 3 unknown"
    required_blocks = ("model", "kernel")

    def run(self) -> int:
        from hawkes_lift.diagnostics.assumptions import SamplingBox, check_assumptions

        block = self.config.blocks.get("check")
        box = block.box() if block else SamplingBox()
        report = check_assumptions(self.config.model, self.config.kernel, box)
        sys.stdout.write(report.render_text() + "\n")
        write_key_values(self.output("check.csv"), report.to_rows(), {"config": self.config.name})
        logger.info(f"Assumption check verdict: {report.verdict.value}")
        return report.exit_code


class ConvergeCommand(BaseCommand):
    """Coupled-path convergence study along a fit ladder."""

    name = "converge"
    description = "coupled convergence study over a fit ladder; writes convergence.csv and convergence_samples.csv"
    required_blocks = ("model", "kernel", "converge")

    def run(self) -> int:
        from hawkes_lift.experiments.study import convergence_study, write_convergence, write_samples

        block = self.config.blocks["converge"]
        driver = self.config.driver
        if block.n_paths == 1:
            logger.warning("⚠️ n_paths = 1: standard errors are reported as missing")
        study = convergence_study(
            self.config.model,
            self.config.kernel,
            block.beta,
            block.n_list,
            driver.horizon,
            block.n_paths,
            driver.seed,
            dt=driver.dt,
            lambda_max=self.config.lambda_max(),
            method=block.method,
            threads=self.config.run.threads,
            allow_unstable=driver.allow_unstable,
        )
        meta = {**self.driver_metadata(), "n_paths": block.n_paths, "beta": block.beta}
        write_convergence(self.output("convergence.csv"), study, meta)
        write_samples(self.output("convergence_samples.csv"), study)
        return 0


class PortfolioCommand(BaseCommand):
    """Closed-form and simulated values of the log-utility investor."""

    name = "portfolio"
    description = "closed-form vs simulated log-utility values along a fit ladder; writes portfolio.csv"
    required_blocks = ("kernel", "portfolio")

    def run(self) -> int:
        from hawkes_lift.control.market import MarketSpec, merton_value, psi_hat
        from hawkes_lift.control.policy import constant_policy, optimal_policy, policy_simulation_value
        from hawkes_lift.control.value import value_closed_form
        from hawkes_lift.kernel.fitting import fit_ladder

        block = self.config.blocks["portfolio"]
        driver = self.config.driver
        threads = self.config.run.threads
        fits = fit_ladder(self.config.kernel, block.n_list, block.beta, method=block.method)

        rows, previous = [], None
        for result in fits:
            mkt = MarketSpec(
                mu=block.mu,
                r=block.r,
                sigma=block.sigma,
                gamma_jump=block.gamma_jump,
                rho=block.rho,
                x0_wealth=block.x0_wealth,
                lambda0=block.lambda0,
                kernel=result.kernel,
                lambda_cap=block.lambda_cap,
            )
            common = dict(horizon_trunc=block.horizon_trunc, n_paths=block.n_paths, seed0=driver.seed,
                          dt=driver.dt, threads=threads)
            closed = value_closed_form(mkt, tolerance=block.tolerance, allow_unstable=driver.allow_unstable, **common)
            simulated = policy_simulation_value(mkt, optimal_policy(mkt), **common)
            suboptimal = policy_simulation_value(mkt, constant_policy(mkt.rho, block.suboptimal_omega), **common)
            spread = np.hypot(np.nan_to_num(closed.se), np.nan_to_num(simulated.se))
            agree = abs(closed.v0n - simulated.value) <= 3.0 * spread + closed.tail_bound
            rows.append({
                "n": result.n,
                "V0n": closed.v0n,
                "se": closed.se,
                "tail_bound": closed.tail_bound,
                "omega_star_at_lambda0": psi_hat(block.lambda0, mkt).omega,
                "gap": abs(closed.v0n - previous) if previous is not None else float("nan"),
                "sim_value": simulated.value,
                "sim_se": simulated.se,
                "agreement": "PASS" if agree else "FAIL",
                "suboptimal_value": suboptimal.value,
            })
            previous = closed.v0n

        meta = {
            **self.driver_metadata(),
            "merton_value": merton_value(mkt),
            "horizon_trunc": block.horizon_trunc,
            "n_paths": block.n_paths,
        }
        write_table(self.output("portfolio.csv"), pd.DataFrame(rows), meta)
        failed = [row["n"] for row in rows if row["agreement"] == "FAIL"]
        if failed:
            logger.warning(f"⚠️ Closed-form and simulated values disagree for n = {failed}")
        return 0


# Command registry
_AVAILABLE_COMMANDS = {
    FitKernelCommand.name: FitKernelCommand,
    SimulateCommand.name: SimulateCommand,
    CheckCommand.name: CheckCommand,
    ConvergeCommand.name: ConvergeCommand,
    PortfolioCommand.name: PortfolioCommand,
}


def get_command_names():
    """Get the names of all available commands.

    Returns:
        List[str]: List of available command names
    """
    return list(_AVAILABLE_COMMANDS.keys())


def get_available_commands():
    """Get all available commands.

    Returns:
        Dict[str, Type]: Dictionary mapping command names to command classes
    """
    return _AVAILABLE_COMMANDS.copy()
