from .generator import TestFunction, apply_generator, dynkin_residuals, quadratic_test_function
from .lifted import LiftedExcitation, LiftedState, simulate_lifted
