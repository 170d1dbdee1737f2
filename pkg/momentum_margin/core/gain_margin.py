"""
Robust gain margin certificate for the plant family lambda P(z), P(z) = 1/(z-1).

A proper compensator K(z) keeping every closed-loop pole inside |z| < rho for
all lambda in [m, L] exists iff rho > rho* = (sqrt(L)-sqrt(m))/(sqrt(L)+sqrt(m)).
Feasibility reduces to a two-point Nevanlinna-Pick problem once the
sensitivity S(z) = (1 + (m+L)/2 P(z) K(z))^-1 is mapped to the unit disk by
theta, which sends the complement of the forbidden set G onto |w| < 1.
"""
from dataclasses import dataclass
from typing import Any, Dict, List, Tuple, Union
import cmath
import logging
import math

import numpy as np

from .lifting import LiftedSystem, RationalFunction, transfer_functions
from .method_spec import FunctionClass

logger = logging.getLogger(__name__)

Number = Union[float, complex]


def rho_star(fc: FunctionClass) -> float:
    """Optimal asymptotic rate (sqrt(L)-sqrt(m))/(sqrt(L)+sqrt(m)) on Q_{m,L}."""
    root_m, root_L = math.sqrt(fc.m), math.sqrt(fc.L)
    return (root_L - root_m) / (root_L + root_m)


@dataclass(frozen=True)
class ForbiddenSet:
    """G = (-inf, 2m/(m-L)] U [2L/(L-m), +inf); empty when m = L."""
    left_bound: float
    right_bound: float

    @classmethod
    def for_class(cls, fc: FunctionClass) -> "ForbiddenSet":
        if fc.is_degenerate:
            return cls(left_bound=-math.inf, right_bound=math.inf)
        return cls(
            left_bound=2.0 * fc.m / (fc.m - fc.L),
            right_bound=2.0 * fc.L / (fc.L - fc.m),
        )

    def contains(self, x: Number) -> bool:
        """Membership for real values; complex numbers off the real axis are never in G."""
        value = complex(x)
        if value.imag != 0.0:
            return False
        real = value.real
        if math.isinf(self.right_bound):
            return False
        return real <= self.left_bound or real >= self.right_bound


def theta(z: Number, fc: FunctionClass) -> complex:
    """
    Conformal map of the complement of G onto the open unit disk.

    theta(z) = (1 - r(z)) / (1 + r(z)), r(z) = sqrt((1 - (L-m)/(2L) z) / (1 - (m-L)/(2m) z)),
    with the principal square root. theta(0) = 0 and theta(1) = rho*.
    """
    forbidden = ForbiddenSet.for_class(fc)
    if forbidden.contains(z):
        raise ValueError(f"theta is undefined on the forbidden set: z={z!r}")
    z = complex(z)
    m, L = fc.m, fc.L
    ratio = (1.0 - (L - m) / (2.0 * L) * z) / (1.0 - (m - L) / (2.0 * m) * z)
    root = cmath.sqrt(ratio)
    return (1.0 - root) / (1.0 + root)


@dataclass(frozen=True)
class MarginProblem:
    """Place all closed-loop poles in |z| < rho for every gain in [m, L]."""
    fc: FunctionClass
    rho: float

    def __post_init__(self):
        rho = float(self.rho)
        if not 0.0 < rho < 1.0:
            raise ValueError(f"Target radius must lie in (0, 1), got {self.rho}")
        object.__setattr__(self, "rho", rho)


@dataclass(frozen=True, eq=False)
class FeasibilityReport:
    """Pick-matrix test of the two-point interpolation problem."""
    problem: MarginProblem
    feasible: bool
    pick_matrix: np.ndarray
    first_minor: float
    determinant: float
    rho_star: float
    interpolation: Tuple[Tuple[float, float], Tuple[float, float]]  # (point, value) pairs

    def to_dict(self) -> Dict[str, Any]:
        return {
            "m": self.problem.fc.m,
            "L": self.problem.fc.L,
            "rho": self.problem.rho,
            "rho_star": self.rho_star,
            "feasible": self.feasible,
            "pick_matrix": self.pick_matrix.tolist(),
            "first_minor": self.first_minor,
            "determinant": self.determinant,
            "interpolation": [list(pair) for pair in self.interpolation],
        }


def pick_feasible(problem: MarginProblem) -> FeasibilityReport:
    """
    Test positive definiteness of [[1 - theta(1)^2, 1], [1, 1/(1 - rho^2)]].

    The interpolation data are s(0) = theta(1) = rho* and s(rho) = theta(0) = 0.
    Positive definiteness is decided by the leading principal minors, with the
    determinant in the factored form (rho - s)(rho + s) / ((1 - rho)(1 + rho)),
    s = s(0), so its sign is exact even when rho is within rounding of rho*.
    """
    fc, rho = problem.fc, problem.rho
    s_at_zero = rho_star(fc)  # theta(1) in closed form
    s_at_rho = theta(0.0, fc).real

    pick = np.array([
        [(1.0 - s_at_zero) * (1.0 + s_at_zero), 1.0],
        [1.0, 1.0 / ((1.0 - rho) * (1.0 + rho))],
    ])
    first_minor = float(pick[0, 0])
    determinant = (rho - s_at_zero) * (rho + s_at_zero) / ((1.0 - rho) * (1.0 + rho))
    feasible = first_minor > 0.0 and determinant > 0.0

    logger.debug(f"Pick test on [{fc.m}, {fc.L}] at rho={rho}: det={determinant:.3e}, feasible={feasible}")
    return FeasibilityReport(
        problem=problem,
        feasible=feasible,
        pick_matrix=pick,
        first_minor=first_minor,
        determinant=determinant,
        rho_star=rho_star(fc),
        interpolation=((0.0, s_at_zero), (rho, s_at_rho)),
    )


@dataclass(frozen=True)
class MarginCheck:
    rho: float
    pick_feasible: bool
    above_rho_star: bool

    @property
    def agrees(self) -> bool:
        return self.pick_feasible == self.above_rho_star


def margin_equivalence_check(fc: FunctionClass, rho_grid: List[float]) -> List[MarginCheck]:
    """Both sides of 'a compensator exists iff rho > rho*' on each grid point."""
    target = rho_star(fc)
    checks = []
    for rho in rho_grid:
        report = pick_feasible(MarginProblem(fc, rho))
        checks.append(MarginCheck(rho=float(rho), pick_feasible=report.feasible,
                                  above_rho_star=rho > target))
    disagreements = [c.rho for c in checks if not c.agrees]
    if disagreements:
        logger.warning(f"Pick test disagrees with rho > rho* at rho={disagreements}")
    return checks


def sensitivity_function(system: LiftedSystem, fc: FunctionClass) -> RationalFunction:
    """S(z) = (1 + (m+L)/2 P(z) K(z))^-1 for the method's compensator K."""
    plant, compensator = transfer_functions(system)
    gain = (fc.m + fc.L) / 2.0
    open_den = np.polymul(plant.denominator, compensator.denominator)
    open_num = gain * np.polymul(plant.numerator, compensator.numerator)
    return RationalFunction(numerator=tuple(open_den), denominator=tuple(np.polyadd(open_den, open_num)))


def interpolation_constraints(system: LiftedSystem, fc: FunctionClass) -> Tuple[complex, float]:
    """(S(1), S(infinity)); a proper compensator gives (0, 1)."""
    sensitivity = sensitivity_function(system, fc)
    return complex(sensitivity(1.0)), sensitivity.at_infinity()


def gain_for_sensitivity(x: float, fc: FunctionClass) -> float:
    """
    Gain lambda at which a point with real sensitivity x is a closed-loop pole.

    From S = 1/(1 + (m+L)/2 PK) and 1 + lambda PK = 0: lambda = (m+L) / (2 (1 - 1/x)).
    Values x in G map into [m, L].
    """
    if x == 0.0 or x == 1.0:
        raise ValueError(f"Sensitivity value {x} corresponds to no finite gain")
    return (fc.m + fc.L) / (2.0 * (1.0 - 1.0 / x))


def forbidden_set_hits(system: LiftedSystem, fc: FunctionClass, rho: float,
                       samples: int = 4001, radius: float = 1e3) -> List[Tuple[float, float, float]]:
    """
    Real points z with rho <= |z| <= radius where S(z) falls into G.

    Returns (z, S(z), lambda) triples; lambda is the gain making z a closed-loop pole.
    A method whose worst-case rate is below rho has no hits.
    """
    forbidden = ForbiddenSet.for_class(fc)
    sensitivity = sensitivity_function(system, fc)
    magnitudes = np.geomspace(rho, radius, samples)
    hits = []
    for z in np.concatenate([magnitudes, -magnitudes]):
        den = np.polyval(sensitivity.denominator, z)
        if den == 0.0:
            continue
        value = float(np.polyval(sensitivity.numerator, z) / den)
        if forbidden.contains(value):
            hits.append((float(z), value, gain_for_sensitivity(value, fc)))
    return hits
