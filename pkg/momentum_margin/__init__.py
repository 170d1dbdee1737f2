"""
momentum_margin - Worst-case convergence rates of fixed-parameter first-order methods
on strongly convex quadratics, with the heavy-ball optimality certificate
"""

__version__ = "1.0.0"
__author__ = "Engineering Team"

from .core.config import Config
from .core.engine import RateEngine
from .core.method_spec import FunctionClass, MethodSpec, preset, validate
from .core.spectral_analysis import worst_case_rho, certify_lower_bound
from .core.gain_margin import MarginProblem, pick_feasible, rho_star
from .core.simulation import make_quadratic, run, estimate_r_factor
