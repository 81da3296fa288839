"""Run configuration: INI-style blocks validated with pydantic before any computation."""

import configparser
import os
from typing import Annotated, Any, Dict, List, Literal, Optional, Type

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from hawkes_lift.common.errors import ConfigError, HawkesLiftError
from hawkes_lift.common.logging import get_logger
from hawkes_lift.common.parsing import parse_list, parse_scalar
from hawkes_lift.diagnostics.assumptions import SamplingBox
from hawkes_lift.hawkes_core.model import ModelSpec, build_model
from hawkes_lift.kernel.builtins import build_kernel, load_tabulated_kernel
from hawkes_lift.kernel.base import ExpSumKernel, Kernel
from hawkes_lift.kernel.fitting import negligible_horizon

logger = get_logger(__name__)

OUT_ENV = "HAWKES_LIFT_OUT"
THREADS_ENV = "HAWKES_LIFT_THREADS"

Orders = Annotated[List[Annotated[int, Field(ge=1)]], Field(min_length=1)]


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid")

    @field_validator("*", mode="before")
    @classmethod
    def _decode_lists(cls, value, info):
        if info.field_name in ("n_list", "fit_orders", "weights", "rates"):
            return parse_list(value)
        return value


class RunBlock(_Block):
    out: Annotated[str, Field(description="output directory for every file written")] = "out"
    threads: Annotated[Optional[int], Field(description="Monte Carlo worker threads (default: machine parallelism)", ge=1)] = None


class ModelBlock(BaseModel):
    """``name`` picks a builtin model; every other key is passed to it as a parameter."""

    model_config = ConfigDict(extra="allow")

    name: Annotated[str, Field(description="builtin model: jump_ou, linear_hawkes, poisson, state_free, pure_diffusion")]

    def build(self) -> ModelSpec:
        return build_model(self.name, **(self.model_extra or {}))


class KernelBlock(BaseModel):
    model_config = ConfigDict(extra="allow")

    kind: Annotated[Literal["builtin", "expsum", "csv"], Field(description="kernel source")] = "builtin"
    name: Annotated[Optional[str], Field(description="builtin kernel: nonmonotone, exponential, power_law, zero")] = None
    weights: Annotated[Optional[List[float]], Field(description="expsum weights eta_1..eta_n (JSON array)")] = None
    rates: Annotated[Optional[List[float]], Field(description="expsum decay rates, strictly increasing and positive (JSON array)")] = None
    path: Annotated[Optional[str], Field(description="csv kernel file with columns t, phi")] = None

    @field_validator("weights", "rates", mode="before")
    @classmethod
    def _decode(cls, value):
        return parse_list(value)

    def build(self, base_dir: str = "") -> Kernel:
        params = self.model_extra or {}
        if self.kind == "builtin":
            if not self.name:
                raise ConfigError("[kernel] kind = builtin needs a name")
            return build_kernel(self.name, **params)
        if self.kind == "expsum":
            if self.weights is None or self.rates is None:
                raise ConfigError("[kernel] kind = expsum needs weights and rates")
            return ExpSumKernel(eta=self.weights, beta=self.rates, name=self.name or "expsum")
        if not self.path:
            raise ConfigError("[kernel] kind = csv needs a path")
        return load_tabulated_kernel(os.path.join(base_dir, self.path))


class DriverBlock(_Block):
    seed: Annotated[int, Field(description="base seed (path i uses seed + i)", ge=0)] = 0
    dt: Annotated[float, Field(description="Euler grid step; horizon must be a multiple of it", gt=0)] = 0.01
    horizon: Annotated[float, Field(description="simulation horizon T", gt=0)] = 10.0
    lambda_max: Annotated[Optional[float], Field(description="dominating Poisson rate (default: sup lambda_inf + sup psi of the model)", gt=0)] = None
    allow_unstable: Annotated[bool, Field(description="simulate even when the stability check fails")] = False


class _LadderFitBlock(_Block):
    method: Annotated[Literal["l1", "l2"], Field(description="l2: Hilbert system, l1: pattern search on J")] = "l1"
    window: Annotated[
        Optional[float],
        Field(description="l1 only: integrate J over [0, window]; default 5 / beta, where the ladder is negligible", gt=0),
    ] = None

    def fit_kwargs(self) -> Dict[str, Any]:
        """Keyword arguments for ``fit`` / ``fit_ladder``."""
        if self.method != "l1":
            return {}
        return {"window": self.window if self.window is not None else negligible_horizon(self.beta)}


class FitBlock(_LadderFitBlock):
    n_list: Annotated[Orders, Field(description="numbers of exponentials to fit (JSON array)")]
    beta: Annotated[float, Field(description="ladder base rate, decay rates are beta * (1..n)", gt=0)]
    curve_horizon: Annotated[float, Field(description="right end of the kernel_curves.csv grid", gt=0)] = 10.0
    curve_step: Annotated[float, Field(description="step of the kernel_curves.csv grid", gt=0)] = 0.01


class SimulateBlock(_LadderFitBlock):
    fit_orders: Annotated[List[Annotated[int, Field(ge=1)]], Field(description="also simulate the n-exponential fits of the kernel on the same driver (JSON array)")] = []
    beta: Annotated[float, Field(description="ladder base rate for fit_orders", gt=0)] = 0.5
    include_target: Annotated[bool, Field(description="simulate the configured kernel itself")] = True
    write_brownian: Annotated[bool, Field(description="add the cumulative Brownian path as column w of path_<label>.csv")] = False
    seed_scan: Annotated[int, Field(description="scan this many seeds from [driver] seed for one where the largest fit accepts exactly the target's points and the smallest does not; 0 keeps the seed", ge=0)] = 0


class CheckBlock(_Block):
    t_min: Annotated[float, Field(description="sampling box: smallest t")] = 0.0
    t_max: Annotated[float, Field(description="sampling box: largest t")] = 10.0
    x_min: Annotated[float, Field(description="sampling box: smallest x")] = -5.0
    x_max: Annotated[float, Field(description="sampling box: largest x")] = 5.0
    u_min: Annotated[float, Field(description="sampling box: smallest psi argument")] = -10.0
    u_max: Annotated[float, Field(description="sampling box: largest psi argument")] = 10.0
    n_t: Annotated[int, Field(description="sample count in t", ge=2)] = 11
    n_x: Annotated[int, Field(description="sample count in x", ge=2)] = 201
    n_u: Annotated[int, Field(description="sample count in u", ge=2)] = 401

    def box(self) -> SamplingBox:
        return SamplingBox(
            t_range=(self.t_min, self.t_max),
            x_range=(self.x_min, self.x_max),
            u_range=(self.u_min, self.u_max),
            n_t=self.n_t,
            n_x=self.n_x,
            n_u=self.n_u,
        )


class ConvergeBlock(_Block):
    n_list: Annotated[Orders, Field(description="fit ladder orders (JSON array, non-empty)")]
    beta: Annotated[float, Field(description="ladder base rate", gt=0)]
    n_paths: Annotated[int, Field(description="coupled paths per row", ge=1)] = 100
    method: Annotated[Literal["l1", "l2"], Field(description="fit method")] = "l2"


class PortfolioBlock(_Block):
    mu: Annotated[float, Field(description="asset drift")]
    r: Annotated[float, Field(description="risk-free rate")]
    sigma: Annotated[float, Field(description="asset volatility", gt=0)]
    gamma_jump: Annotated[float, Field(description="relative jump size, must exceed -1", gt=-1)]
    rho: Annotated[float, Field(description="discount rate", gt=0)]
    x0_wealth: Annotated[float, Field(description="initial wealth", gt=0)] = 1.0
    lambda0: Annotated[float, Field(description="baseline jump intensity", ge=0)] = 1.0
    lambda_cap: Annotated[float, Field(description="intensity cap, also the dominating rate", gt=0)] = 50.0
    n_list: Annotated[Orders, Field(description="fit orders of the kernel (JSON array)")]
    beta: Annotated[float, Field(description="ladder base rate", gt=0)] = 1.0
    method: Annotated[Literal["l1", "l2"], Field(description="fit method")] = "l2"
    horizon_trunc: Annotated[float, Field(description="truncation of the infinite-horizon integrals", gt=0)] = 60.0
    tolerance: Annotated[float, Field(description="largest admissible tail bound beyond horizon_trunc", gt=0)] = 1e-3
    n_paths: Annotated[int, Field(description="Monte Carlo paths per value", ge=1)] = 1000
    suboptimal_omega: Annotated[float, Field(description="constant risky fraction of the comparison policy", ge=0, le=1)] = 0.0


BLOCKS: Dict[str, Type[BaseModel]] = {
    "run": RunBlock,
    "model": ModelBlock,
    "kernel": KernelBlock,
    "driver": DriverBlock,
    "fit": FitBlock,
    "simulate": SimulateBlock,
    "check": CheckBlock,
    "converge": ConvergeBlock,
    "portfolio": PortfolioBlock,
}


class RunConfig:
    """Validated blocks of one config file plus the objects they build."""

    def __init__(self, path: str, blocks: Dict[str, BaseModel]):
        self.path = path
        self.blocks = blocks
        self.run: RunBlock = blocks.get("run") or RunBlock()
        self.driver: DriverBlock = blocks.get("driver") or DriverBlock()
        self.model: Optional[ModelSpec] = None
        self.kernel: Optional[Kernel] = None

    @property
    def name(self) -> str:
        return os.path.basename(self.path)

    def has(self, block: str) -> bool:
        return block in self.blocks

    def require(self, block: str) -> BaseModel:
        if block not in self.blocks:
            raise ConfigError(f"{self.name}: [{block}] block is missing")
        return self.blocks[block]

    def build(self) -> "RunConfig":
        """Construct the model and kernel so that bad builtin names fail before any work."""
        try:
            if "model" in self.blocks:
                self.model = self.blocks["model"].build()
            if "kernel" in self.blocks:
                self.kernel = self.blocks["kernel"].build(os.path.dirname(self.path))
        except HawkesLiftError as exc:
            raise ConfigError(f"{self.name}: {exc}") from exc
        return self

    def lambda_max(self) -> float:
        if self.driver.lambda_max is not None:
            return self.driver.lambda_max
        rate = self.model.dominating_rate() if self.model else None
        if rate is None or rate <= 0:
            raise ConfigError(f"{self.name}: [driver] lambda_max is required for this model")
        return rate

    def apply_overrides(self, out: Optional[str] = None, seed: Optional[int] = None, threads: Optional[int] = None):
        """Flags win over environment variables, which win over the file."""
        env_out = os.environ.get(OUT_ENV)
        env_threads = os.environ.get(THREADS_ENV)
        if out or env_out:
            self.run = self.run.model_copy(update={"out": out or env_out})
        if threads or env_threads:
            self.run = self.run.model_copy(update={"threads": int(threads or env_threads)})
        if seed is not None:
            if seed < 0:
                raise ConfigError(f"--seed must be non-negative, got {seed}")
            self.driver = self.driver.model_copy(update={"seed": seed})
        return self


def _format_validation(name: str, block: str, exc: ValidationError) -> str:
    problems = "; ".join(
        f"{'.'.join(str(p) for p in err['loc']) or block}: {err['msg']}" for err in exc.errors()
    )
    return f"{name}: [{block}] {problems}"


def load_config(path: str) -> RunConfig:
    """Read and validate every block of ``path``.

    Raises:
        ConfigError: Unreadable file, unknown block, bad key or value, unknown builtin.
    """
    name = os.path.basename(path)
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        with open(path) as handle:
            parser.read_file(handle)
    except OSError as exc:
        raise ConfigError(f"{name}: cannot read config: {exc}")
    except configparser.Error as exc:
        raise ConfigError(f"{name}: malformed config: {exc}")

    blocks: Dict[str, BaseModel] = {}
    for section in parser.sections():
        if section not in BLOCKS:
            raise ConfigError(f"{name}: unknown block [{section}]. Known blocks: {', '.join(BLOCKS)}")
        raw: Dict[str, Any] = {key: parse_scalar(value) for key, value in parser.items(section)}
        try:
            blocks[section] = BLOCKS[section].model_validate(raw)
        except ValidationError as exc:
            raise ConfigError(_format_validation(name, section, exc))
        except ValueError as exc:
            raise ConfigError(f"{name}: [{section}] {exc}")
    logger.debug(f"Loaded {name} with blocks {list(blocks)}")
    return RunConfig(path, blocks).build()


def config_help() -> str:
    """Every block key with its description and constraints, for ``--help``."""
    lines = ["config keys:"]
    for block, model in BLOCKS.items():
        lines.append(f"  [{block}]")
        for key, info in model.model_fields.items():
            constraints = ", ".join(str(m) for m in info.metadata)
            default = "required" if info.is_required() else f"default {info.default!r}"
            extra = f" ({constraints})" if constraints else ""
            lines.append(f"    {key}: {info.description or ''}{extra} [{default}]")
        if model.model_config.get("extra") == "allow":
            lines.append("    <other keys>: passed to the builtin as parameters")
    return "\n".join(lines)
