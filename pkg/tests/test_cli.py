import os
import textwrap

import pytest

from conftest import CONFIG_DIR
from hawkes_lift.common.csv_io import read_table
from hawkes_lift.config import config_help, load_config
from hawkes_lift.common.errors import ConfigError
from hawkes_lift.main import build_parser, main


def write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(text))
    return str(path)


def read_header(path):
    lines = path.read_text().splitlines()
    return dict(line[2:].split(": ", 1) for line in lines if line.startswith("# "))


LINEAR = """
    [model]
    name = linear_hawkes
    lambda0 = 1.0

    [kernel]
    kind = builtin
    name = exponential
    eta = {eta}
    beta = 1.0

    [driver]
    seed = 0
    dt = 0.01
    horizon = 2
    lambda_max = {lambda_max}
"""


class TestParser:
    def test_options_before_and_after_the_command(self):
        parser = build_parser()
        before = parser.parse_args(["--config", "a.cfg", "--seed", "3", "check"])
        after = parser.parse_args(["check", "--config", "a.cfg", "--seed", "3"])
        assert (before.command, before.config, before.seed) == ("check", "a.cfg", 3)
        assert (after.command, after.config, after.seed) == ("check", "a.cfg", 3)

    def test_help_lists_config_keys(self):
        text = config_help()
        assert "[portfolio]" in text
        assert "lambda_max" in text

    def test_missing_command(self, capsys):
        assert main([]) == 1

    def test_missing_config(self, capsys):
        assert main(["check"]) == 1
        assert "--config" in capsys.readouterr().err


class TestConfig:
    def test_shipped_configs_validate(self):
        for name in sorted(os.listdir(CONFIG_DIR)):
            if name.endswith(".cfg"):
                load_config(os.path.join(CONFIG_DIR, name))

    def test_unknown_block(self, tmp_path):
        path = write_config(tmp_path, "[solver]\nname = x\n")
        with pytest.raises(ConfigError, match="unknown block"):
            load_config(path)

    def test_bad_value_names_block_and_key(self, tmp_path):
        path = write_config(tmp_path, "[driver]\ndt = -1\n")
        with pytest.raises(ConfigError, match=r"\[driver\] dt"):
            load_config(path)

    def test_unknown_builtin_kernel(self, tmp_path):
        path = write_config(tmp_path, "[kernel]\nname = gaussian\n")
        with pytest.raises(ConfigError, match="Available"):
            load_config(path)

    def test_expsum_kernel_from_lists(self, tmp_path):
        path = write_config(tmp_path, "[kernel]\nkind = expsum\nweights = [1.0, -0.5]\nrates = [1.0, 2.0]\n")
        config = load_config(path)
        assert config.kernel.n == 2

    def test_csv_kernel_is_resolved_next_to_the_config(self, tmp_path):
        (tmp_path / "phi.csv").write_text("t,phi\n0,1\n1,0.5\n2,0\n")
        config = load_config(write_config(tmp_path, "[kernel]\nkind = csv\npath = phi.csv\n"))
        assert config.kernel(0.5) == pytest.approx(0.75)

    @pytest.mark.parametrize("body", [None, "", "t,phi\n0,\"1\n"])
    def test_unreadable_csv_kernel(self, tmp_path, capsys, body):
        if body is not None:
            (tmp_path / "phi.csv").write_text(body)
        path = write_config(tmp_path, "[kernel]\nkind = csv\npath = phi.csv\n")
        with pytest.raises(ConfigError, match="phi.csv"):
            load_config(path)
        assert main(["fit-kernel", "-c", path, "-o", str(tmp_path / "out")]) == 1
        assert "phi.csv" in capsys.readouterr().err

    def test_overrides(self, tmp_path, monkeypatch):
        path = write_config(tmp_path, "[run]\nout = from_file\nthreads = 2\n")
        monkeypatch.setenv("HAWKES_LIFT_OUT", "from_env")
        config = load_config(path).apply_overrides(threads=4, seed=9)
        assert config.run.out == "from_env"
        assert config.run.threads == 4
        assert config.driver.seed == 9
        assert load_config(path).apply_overrides(out="from_flag").run.out == "from_flag"


class TestCheck:
    @pytest.mark.parametrize("eta,code", [(0.5, 0), (0.98, 3), (1.5, 2)])
    def test_exit_codes(self, tmp_path, capsys, eta, code):
        path = write_config(tmp_path, LINEAR.format(eta=eta, lambda_max=40))
        assert main(["check", "-c", path, "-o", str(tmp_path / "out")]) == code
        assert "stability_product" in capsys.readouterr().out
        assert os.path.exists(tmp_path / "out" / "check.csv")

    def test_shipped_config(self, tmp_path, capsys):
        path = os.path.join(CONFIG_DIR, "check_linear.cfg")
        assert main(["check", "--config", path, "--out", str(tmp_path)]) == 0
        table = read_table(str(tmp_path / "check.csv"))
        assert dict(zip(table["key"], table["value"]))["verdict"] == "PASS"

    def test_missing_block(self, tmp_path, capsys):
        path = write_config(tmp_path, "[kernel]\nname = zero\n")
        assert main(["check", "-c", path, "-o", str(tmp_path)]) == 1
        assert "[model] block is missing" in capsys.readouterr().err


class TestFitKernel:
    def test_nonmonotone_fits(self, tmp_path):
        path = os.path.join(CONFIG_DIR, "nonmonotone_fits.cfg")
        assert main(["fit-kernel", "-c", path, "-o", str(tmp_path)]) == 0
        fits = read_table(str(tmp_path / "fit.csv"))
        assert list(fits["n"]) == [2, 3]
        assert fits.loc[0, "eta_1"] == pytest.approx(-1.16, abs=0.05)
        assert fits.loc[0, "eta_2"] == pytest.approx(2.17, abs=0.05)
        assert fits.loc[0, "eta_3"] != fits.loc[0, "eta_3"]
        for column, expected in zip(("eta_1", "eta_2", "eta_3"), (-0.82, 0.58, 1.39)):
            assert fits.loc[1, column] == pytest.approx(expected, abs=0.05)
        header = read_header(tmp_path / "fit.csv")
        assert header["method"] == "l1"
        assert float(header["window"]) == pytest.approx(10.0)
        curves = read_table(str(tmp_path / "kernel_curves.csv"))
        assert list(curves.columns) == ["t", "phi", "phi_n2", "phi_n3"]
        assert len(curves) == 1001


class TestSimulate:
    def test_writes_paths_and_is_reproducible(self, tmp_path):
        path = write_config(tmp_path, LINEAR.format(eta=0.5, lambda_max=40) + "\n[simulate]\nfit_orders = [1]\nbeta = 1.0\n")
        assert main(["simulate", "-c", path, "-o", str(tmp_path / "a")]) == 0
        assert main(["simulate", "-c", path, "-o", str(tmp_path / "b")]) == 0
        for name in ("poisson_points.csv", "path_target.csv", "jumps_target.csv", "path_n1.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        frame = read_table(str(tmp_path / "a" / "path_target.csv"))
        assert list(frame.columns) == ["t", "x", "lambda", "xi_1"]
        assert len(frame) == 201

    def test_brownian_column_on_request(self, tmp_path):
        text = LINEAR.format(eta=0.5, lambda_max=40) + "\n[simulate]\nfit_orders = []\nwrite_brownian = true\n"
        path = write_config(tmp_path, text)
        assert main(["simulate", "-c", path, "-o", str(tmp_path)]) == 0
        frame = read_table(str(tmp_path / "path_target.csv"))
        assert list(frame.columns) == ["t", "x", "lambda", "xi_1", "w"]
        assert frame["w"].iloc[0] == 0.0

    def test_seed_scan_picks_a_separating_seed(self, tmp_path):
        text = LINEAR.format(eta=0.5, lambda_max=4).replace("horizon = 2", "horizon = 10") + textwrap.dedent("""
            [simulate]
            fit_orders = [1, 2]
            beta = 0.5
            method = l2
            seed_scan = 50
        """)
        path = write_config(tmp_path, text)
        assert main(["simulate", "-c", path, "-o", str(tmp_path / "a")]) == 0
        assert main(["simulate", "-c", path, "-o", str(tmp_path / "b")]) == 0
        jumps = {label: read_table(str(tmp_path / "a" / f"jumps_{label}.csv")) for label in ("target", "n1", "n2")}
        assert list(jumps["n2"]["t"]) == list(jumps["target"]["t"])
        assert list(jumps["n1"]["t"]) != list(jumps["target"]["t"])
        seed = read_header(tmp_path / "a" / "path_target.csv")["seed"]
        assert read_header(tmp_path / "b" / "path_target.csv")["seed"] == seed
        assert 0 <= int(seed) < 50

    def test_seed_scan_needs_two_fits(self, tmp_path, capsys):
        text = LINEAR.format(eta=0.5, lambda_max=40) + "\n[simulate]\nfit_orders = [1]\nseed_scan = 5\n"
        path = write_config(tmp_path, text)
        assert main(["simulate", "-c", path, "-o", str(tmp_path)]) == 1
        assert "seed_scan" in capsys.readouterr().err

    @pytest.mark.slow
    def test_shipped_shared_driver_config(self, tmp_path):
        path = os.path.join(CONFIG_DIR, "shared_driver.cfg")
        assert main(["simulate", "-c", path, "-o", str(tmp_path)]) == 0
        times = {label: list(read_table(str(tmp_path / f"jumps_{label}.csv"))["t"]) for label in ("target", "n2", "n3")}
        assert times["n3"] == times["target"]
        assert times["n2"] != times["target"]

    def test_seed_flag_changes_the_noise(self, tmp_path):
        path = write_config(tmp_path, LINEAR.format(eta=0.5, lambda_max=40))
        main(["simulate", "-c", path, "-o", str(tmp_path / "a")])
        main(["simulate", "-c", path, "-o", str(tmp_path / "b"), "--seed", "1"])
        assert (tmp_path / "a" / "path_target.csv").read_bytes() != (tmp_path / "b" / "path_target.csv").read_bytes()

    def test_unstable_kernel_is_refused(self, tmp_path, capsys):
        path = write_config(tmp_path, LINEAR.format(eta=1.5, lambda_max=40))
        assert main(["simulate", "-c", path, "-o", str(tmp_path)]) == 2
        assert "allow_unstable" in capsys.readouterr().err

    def test_domination_violation(self, tmp_path, capsys):
        path = write_config(tmp_path, LINEAR.format(eta=0.5, lambda_max=0.5))
        assert main(["simulate", "-c", path, "-o", str(tmp_path)]) == 4
        assert "lambda_max" in capsys.readouterr().err

    def test_missing_dominating_rate(self, tmp_path, capsys):
        text = LINEAR.format(eta=0.5, lambda_max=40).replace("lambda_max = 40\n", "")
        path = write_config(tmp_path, text)
        assert main(["simulate", "-c", path, "-o", str(tmp_path)]) == 1
        assert "lambda_max is required" in capsys.readouterr().err


class TestConverge:
    def test_small_study(self, tmp_path):
        path = write_config(tmp_path, """
            [model]
            name = state_free

            [kernel]
            name = power_law
            c = 0.5
            p = 2.5

            [driver]
            seed = 100
            dt = 0.01
            horizon = 2

            [converge]
            n_list = [1, 2]
            beta = 0.5
            n_paths = 5
        """)
        assert main(["converge", "-c", path, "-o", str(tmp_path), "--threads", "1"]) == 0
        table = read_table(str(tmp_path / "convergence.csv"))
        assert list(table["n"]) == [1, 2]
        assert len(read_table(str(tmp_path / "convergence_samples.csv"))) == 10


class TestPortfolio:
    def test_small_ladder(self, tmp_path):
        path = write_config(tmp_path, """
            [kernel]
            name = power_law
            c = 0.5
            p = 2.5

            [driver]
            seed = 0
            dt = 0.05

            [portfolio]
            mu = 0.08
            r = 0.03
            sigma = 0.2
            gamma_jump = -0.1
            rho = 0.2
            lambda0 = 0.3
            n_list = [1, 2]
            beta = 0.5
            horizon_trunc = 40
            n_paths = 5
        """)
        assert main(["portfolio", "-c", path, "-o", str(tmp_path), "--threads", "1"]) == 0
        table = read_table(str(tmp_path / "portfolio.csv"))
        assert list(table["n"]) == [1, 2]
        assert table["gap"].isna().iloc[0]
        assert set(table["agreement"]) <= {"PASS", "FAIL"}

    def test_horizon_too_short(self, tmp_path, capsys):
        path = write_config(tmp_path, """
            [kernel]
            name = exponential

            [portfolio]
            mu = 0.08
            r = 0.03
            sigma = 0.2
            gamma_jump = -0.1
            rho = 0.2
            n_list = [1]
            horizon_trunc = 5
            n_paths = 2
        """)
        assert main(["portfolio", "-c", path, "-o", str(tmp_path)]) == 1
        assert "horizon_trunc >=" in capsys.readouterr().err
