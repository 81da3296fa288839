from .base import (
    NEGLIGIBLE,
    ExpSumKernel,
    GeneralKernel,
    Kernel,
    kernel_difference,
    ladder,
    scaled_kernel,
    tabulated_kernel,
)
from .builtins import build_kernel, get_kernel_names, load_tabulated_kernel, nonmonotone
from .fitting import FitResult, fit, fit_l1, fit_l2, fit_ladder, modified_hilbert, negligible_horizon
from .quadrature import l1_distance, l1_norm, l2_distance_sq, l2_error_sq, l2_norm_sq
