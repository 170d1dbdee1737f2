"""
Linear-system representation of a fixed-parameter method.

The state X_t = [x_{t-k}; ...; x_t] evolves as X_{t+1} = A X_t + B U_t with
A = A0 (x) I_n and B = B0 (x) I_n, and the gradients are taken at
Y_t = [C_l X_t; ...; C_0 X_t]. On a quadratic with Hessian H the deviation
from the equilibrium obeys X_{t+1} - X* = Abar (X_t - X*) with

    Abar = A0 (x) I_n - (B0 (x) H) C.

Diagonalising H reduces Abar to the scalar companion matrices
g(lambda) = A0 - lambda N, one for each eigenvalue lambda of H.
"""
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union
import logging

import numpy as np

from .method_spec import FunctionClass, MethodSpec, require_valid

logger = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-12
SPECTRUM_TOLERANCE = 1e-9


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class QuadraticInstance:
    """f(x) = 1/2 (x - x*)^T H (x - x*) + f0 with H symmetric."""
    hessian: np.ndarray
    minimizer: np.ndarray
    offset: float = 0.0
    fc: Optional[FunctionClass] = None

    def __post_init__(self):
        hessian = np.atleast_2d(np.asarray(self.hessian, dtype=float))
        minimizer = np.atleast_1d(np.asarray(self.minimizer, dtype=float))
        n = hessian.shape[0]
        if hessian.ndim != 2 or hessian.shape != (n, n):
            raise ValueError(f"Hessian must be square, got shape {hessian.shape}")
        if minimizer.shape != (n,):
            raise ValueError(
                f"Dimension mismatch: Hessian is {n}x{n} but minimizer has shape {minimizer.shape}"
            )
        scale = max(1.0, float(np.max(np.abs(hessian))))
        if np.max(np.abs(hessian - hessian.T)) > SYMMETRY_TOLERANCE * scale:
            raise ValueError("Hessian must be symmetric")
        object.__setattr__(self, "hessian", _frozen(hessian))
        object.__setattr__(self, "minimizer", _frozen(minimizer))
        object.__setattr__(self, "offset", float(self.offset))

        if self.fc is not None:
            eigenvalues = self.eigenvalues
            slack = SPECTRUM_TOLERANCE * self.fc.L
            if eigenvalues[0] < self.fc.m - slack or eigenvalues[-1] > self.fc.L + slack:
                raise ValueError(
                    f"Hessian spectrum [{eigenvalues[0]:.6g}, {eigenvalues[-1]:.6g}] "
                    f"is outside [{self.fc.m}, {self.fc.L}]"
                )

    @property
    def dimension(self) -> int:
        return self.minimizer.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        """Hessian eigenvalues in ascending order."""
        return np.linalg.eigvalsh(self.hessian)

    def value(self, x: np.ndarray) -> float:
        d = np.asarray(x, dtype=float) - self.minimizer
        return float(0.5 * d @ self.hessian @ d + self.offset)

    def gradient(self, y: np.ndarray) -> np.ndarray:
        return self.hessian @ (np.asarray(y, dtype=float) - self.minimizer)


@dataclass(frozen=True)
class RationalFunction:
    """numerator(z) / denominator(z), coefficients in descending powers of z."""
    numerator: Tuple[float, ...]
    denominator: Tuple[float, ...]

    def __post_init__(self):
        num = tuple(float(c) for c in self.numerator)
        den = tuple(float(c) for c in self.denominator)
        if not den or den[0] == 0.0:
            raise ValueError("Leading denominator coefficient must be nonzero")
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denominator", den)

    @property
    def numerator_degree(self) -> int:
        nonzero = np.flatnonzero(np.asarray(self.numerator))
        return len(self.numerator) - 1 - int(nonzero[0]) if nonzero.size else 0

    @property
    def denominator_degree(self) -> int:
        return len(self.denominator) - 1

    @property
    def is_proper(self) -> bool:
        return self.numerator_degree <= self.denominator_degree

    def __call__(self, z: Union[complex, np.ndarray]) -> Union[complex, np.ndarray]:
        return np.polyval(self.numerator, z) / np.polyval(self.denominator, z)

    def at_infinity(self) -> float:
        """Limit as z -> infinity of a proper rational function."""
        if not self.is_proper:
            raise ValueError("Improper rational function is unbounded at infinity")
        if self.numerator_degree < self.denominator_degree:
            return 0.0
        leading = np.asarray(self.numerator)[np.flatnonzero(self.numerator)[0]]
        return float(leading / self.denominator[0])

    def to_dict(self):
        return {"numerator": list(self.numerator), "denominator": list(self.denominator)}


@dataclass(frozen=True, eq=False)
class LiftedSystem:
    """Structural matrices A0, B0, C_j^0 and numerator coefficients n_j of a method."""
    a0: np.ndarray
    b0: np.ndarray
    c_rows: Tuple[np.ndarray, ...]  # ordered j = l, ..., 0
    n_coeffs: np.ndarray
    spec: MethodSpec = field(repr=False)

    @property
    def c_matrix(self) -> np.ndarray:
        """C^0 with rows C_l^0, ..., C_0^0."""
        return np.vstack(self.c_rows)

    @property
    def n_matrix(self) -> np.ndarray:
        """N: zero block on top, last row n_k ... n_0."""
        size = self.spec.k + 1
        n = np.zeros((size, size))
        n[-1] = self.n_coeffs[::-1]
        return n

    @property
    def denominator(self) -> np.ndarray:
        """D(z) = z^k - sum_j beta_j z^{k-j-1}."""
        return np.concatenate([[1.0], -self.spec.beta_array])


def convolve_numerator(spec: MethodSpec) -> np.ndarray:
    """n_j = sum_nu alpha_nu gamma_{j-nu}, j = 0..k (out-of-range terms vanish)."""
    require_valid(spec)
    return np.convolve(spec.alpha_array, spec.gamma_array)


def build_structure(spec: MethodSpec) -> LiftedSystem:
    """Assemble A0, B0 and the C_j^0 rows of a valid spec."""
    require_valid(spec)
    k, l = spec.k, spec.l
    size = k + 1

    a0 = np.zeros((size, size))
    a0[:k, 1:] = np.eye(k)
    # coefficient of x_{t-i} in x_{t+1} is [i == 0] + beta_i - beta_{i-1}
    padded = np.concatenate([spec.beta_array, [0.0]])
    coefficients = padded.copy()
    coefficients[0] += 1.0
    coefficients[1:] -= padded[:-1]
    a0[-1] = coefficients[::-1]

    b0 = np.zeros((size, l + 1))
    b0[-1] = spec.alpha_array[::-1]

    reversed_gamma = spec.gamma_array[::-1]
    c_rows = []
    for j in range(l, -1, -1):
        row = np.zeros(size)
        row[l - j:l - j + k - l + 1] = reversed_gamma
        c_rows.append(_frozen(row))

    system = LiftedSystem(
        a0=_frozen(a0),
        b0=_frozen(b0),
        c_rows=tuple(c_rows),
        n_coeffs=_frozen(convolve_numerator(spec)),
        spec=spec,
    )
    logger.debug(f"Built lifted structure for {spec.label}: k={k}, l={l}")
    return system


def companion_matrix(system: LiftedSystem, lam: float) -> np.ndarray:
    """g(lambda) = A0 - lambda N."""
    return system.a0 - float(lam) * system.n_matrix


def characteristic_polynomial(system: LiftedSystem, lam: float) -> np.ndarray:
    """Monic coefficients of (z - 1) D(z) + lambda N(z), degree k+1, descending powers."""
    closed_loop = np.convolve([1.0, -1.0], system.denominator)
    closed_loop[1:] += float(lam) * system.n_coeffs
    return closed_loop


def characteristic_polynomials(system: LiftedSystem, lambdas: np.ndarray) -> np.ndarray:
    """Row-wise characteristic_polynomial for an array of lambdas, shape (len, k+2)."""
    lambdas = np.asarray(lambdas, dtype=float).reshape(-1)
    base = np.convolve([1.0, -1.0], system.denominator)
    polys = np.tile(base, (lambdas.size, 1))
    polys[:, 1:] += lambdas[:, None] * system.n_coeffs[None, :]
    return polys


def build_lifted_matrix(spec: MethodSpec, quadratic: QuadraticInstance) -> np.ndarray:
    """Abar = A0 (x) I_n - (B0 (x) H) C, materialised densely."""
    system = build_structure(spec)
    n = quadratic.dimension
    hessian = quadratic.hessian
    identity = np.eye(n)
    c_full = np.kron(system.c_matrix, identity)
    return np.kron(system.a0, identity) - np.kron(system.b0, hessian) @ c_full


def transfer_functions(system: LiftedSystem) -> Tuple[RationalFunction, RationalFunction]:
    """Plant P(z) = 1/(z-1) and compensator K(z) = N(z)/D(z)."""
    plant = RationalFunction(numerator=(1.0,), denominator=(1.0, -1.0))
    compensator = RationalFunction(
        numerator=tuple(system.n_coeffs),
        denominator=tuple(system.denominator),
    )
    return plant, compensator


def closed_loop_polynomial(plant: RationalFunction, compensator: RationalFunction,
                           lam: float) -> np.ndarray:
    """Monic numerator of 1 + lambda P(z) K(z)."""
    den = np.polymul(plant.denominator, compensator.denominator)
    num = float(lam) * np.polymul(plant.numerator, compensator.numerator)
    total = np.polyadd(den, num)
    return total / total[0]


def stack_history(history: np.ndarray) -> np.ndarray:
    """Lifted state [x_{t-k}; ...; x_t] from a window with history[j] = x_{t-j}."""
    history = np.asarray(history, dtype=float)
    return history[::-1].reshape(-1)


def equilibrium_state(spec: MethodSpec, minimizer: Sequence[float]) -> np.ndarray:
    """X* = 1_{k+1} (x) x*."""
    return np.kron(np.ones(spec.k + 1), np.asarray(minimizer, dtype=float))
