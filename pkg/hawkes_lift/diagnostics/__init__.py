from .assumptions import AssumptionReport, SamplingBox, Verdict, check_assumptions
from .resolvent import Resolvent, intensity_bound, resolvent, trapezoid_convolution
