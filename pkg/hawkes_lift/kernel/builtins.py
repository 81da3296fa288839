"""Named kernels loadable from run configs."""

from typing import Callable, Dict

import numpy as np
import pandas as pd

from hawkes_lift.common.errors import ConfigError, InvalidKernelError
from hawkes_lift.common.csv_io import read_table
from hawkes_lift.kernel.base import DEFAULT_T_CUT, ExpSumKernel, GeneralKernel, Kernel, tabulated_kernel


def nonmonotone(t_cut: float = DEFAULT_T_CUT) -> GeneralKernel:
    """phi(t) = (1 - t) / (1 + t^2.5): excitation then inhibition, O(t^-1.5) tail."""
    return GeneralKernel(
        func=lambda t: (1.0 - np.asarray(t, dtype=float)) / (1.0 + np.asarray(t, dtype=float) ** 2.5),
        cut=t_cut,
        tail_power=1.5,
        name="nonmonotone",
    )


def exponential(eta: float = 0.5, beta: float = 1.0) -> ExpSumKernel:
    return ExpSumKernel(eta=[eta], beta=[beta], name="exponential")


def power_law(c: float = 0.5, p: float = 2.5, t_cut: float = DEFAULT_T_CUT) -> GeneralKernel:
    """phi(t) = c (p - 1) / (1 + t)^p, so that ||phi||_1 = c."""
    return GeneralKernel(
        func=lambda t: c * (p - 1.0) / (1.0 + np.asarray(t, dtype=float)) ** p,
        cut=t_cut,
        tail_power=p,
        name="power_law",
    )


def zero() -> ExpSumKernel:
    return ExpSumKernel.zero()


KERNEL_BUILTINS: Dict[str, Callable[..., Kernel]] = {
    "nonmonotone": nonmonotone,
    "exponential": exponential,
    "power_law": power_law,
    "zero": zero,
    "paper_nonmonotone": nonmonotone,
}


def get_kernel_names():
    return list(KERNEL_BUILTINS.keys())


def build_kernel(name: str, **params) -> Kernel:
    """Instantiate a builtin kernel by name."""
    if name not in KERNEL_BUILTINS:
        raise ConfigError(f"unknown kernel builtin '{name}'. Available kernels: {', '.join(get_kernel_names())}")
    try:
        return KERNEL_BUILTINS[name](**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for kernel '{name}': {exc}")


def load_tabulated_kernel(path: str) -> GeneralKernel:
    """Two-column (t, phi) CSV with linear interpolation between samples.

    Raises:
        ConfigError: Missing or unreadable file, too few columns or samples.
    """
    try:
        frame = read_table(path)
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read kernel table: {exc}") from exc
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise ConfigError(f"{path}: malformed kernel table: {exc}") from exc
    if frame.shape[1] < 2:
        raise ConfigError(f"{path}: expected two columns (t, phi), got {frame.shape[1]}")
    try:
        times = frame.iloc[:, 0].to_numpy(dtype=float)
        values = frame.iloc[:, 1].to_numpy(dtype=float)
        return tabulated_kernel(times, values, name=f"csv:{path}")
    except (ValueError, InvalidKernelError) as exc:
        raise ConfigError(f"{path}: bad kernel table: {exc}") from exc
