from .coupling import CoupledSample, ConvergenceRow, coupled_error, coupled_samples, sup_difference
from .study import (
    ConvergenceStudy,
    convergence_study,
    find_reproduction_seed,
    loglog_slope,
    write_convergence,
    write_samples,
)
