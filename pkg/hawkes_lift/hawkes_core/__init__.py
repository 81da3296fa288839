from .driver import NoiseDriver, make_driver
from .marks import (
    EmpiricalMarks,
    ExponentialMarks,
    MarkDistribution,
    PointMass,
    TruncatedNormalMarks,
    build_b,
    build_marks,
)
from .model import GronwallCase, ModelSpec, build_model, get_model_names
from .moments import MomentSummary, estimate_moments
from .path import JumpLog, PathRecord
from .simulation import ThinningEngine, ensure_stable, simulate, simulate_paths, simulate_volterra
