"""
Spectral radii of the companion matrices g(lambda) and the worst case over [m, L].

The worst-case asymptotic rate of a method on Q_{m,L} is

    sup over lambda in [m, L] of rho(g(lambda)),

the largest root modulus of (z - 1) D(z) + lambda N(z). The supremum is
located by a uniform grid followed by golden-section refinement around every
strict local grid maximum; rho(g(lambda)) is continuous but not smooth where
roots collide, so no derivatives are used.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
import pandas as pd

from .config import SamplerConfig, SweepConfig
from .gain_margin import rho_star
from .lifting import LiftedSystem, build_structure, characteristic_polynomial, characteristic_polynomials
from .method_spec import FunctionClass, MethodSpec
from ..utils import ordered_map, resolve_threads

logger = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5) - 1) / 2
MAX_GOLDEN_ITERATIONS = 200


def _companion_stack(polys: np.ndarray) -> np.ndarray:
    """Companion matrices (last-row form) of a batch of polynomials, shape (batch, d, d)."""
    monic = polys[:, 1:] / polys[:, :1]
    batch, degree = monic.shape
    companions = np.zeros((batch, degree, degree))
    if degree > 1:
        companions[:, :-1, 1:] = np.eye(degree - 1)
    companions[:, -1, :] = -monic[:, ::-1]
    return companions


def polynomial_roots(coeffs: Sequence[float]) -> np.ndarray:
    """All complex roots, with multiplicity, as eigenvalues of the companion matrix."""
    coeffs = np.asarray(coeffs, dtype=float).reshape(-1)
    if coeffs.size < 2:
        raise ValueError("Polynomial must have degree >= 1")
    if coeffs[0] == 0.0:
        raise ValueError("Leading coefficient must be nonzero")
    return np.linalg.eigvals(_companion_stack(coeffs[None, :]))[0].astype(complex)


def spectral_radius_at(system: LiftedSystem, lam: float) -> float:
    """rho(g(lambda)): the largest root modulus of the characteristic polynomial."""
    return float(np.max(np.abs(polynomial_roots(characteristic_polynomial(system, lam)))))


def spectral_radius_curve(system: LiftedSystem, lambdas: Sequence[float]) -> np.ndarray:
    """Vectorised spectral_radius_at over an array of lambdas."""
    polys = characteristic_polynomials(system, np.asarray(lambdas, dtype=float))
    if polys.shape[0] == 0:
        return np.zeros(0)
    roots = np.linalg.eigvals(_companion_stack(polys))
    return np.abs(roots).max(axis=1)


@dataclass(frozen=True, eq=False)
class SweepCurve:
    """Grid samples (lambda, rho(g(lambda)))."""
    lambdas: np.ndarray
    rhos: np.ndarray

    @property
    def samples(self) -> List[Tuple[float, float]]:
        return list(zip(self.lambdas.tolist(), self.rhos.tolist()))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"lambda": self.lambdas, "rho": self.rhos})

    def __len__(self) -> int:
        return int(self.lambdas.size)


@dataclass(frozen=True)
class RateReport:
    """Worst-case asymptotic rate of a method on Q_{m,L}."""
    method: str
    fc: FunctionClass
    worst_rho: float
    argmax_lambda: float
    rho_star: float
    gap: float
    converging: bool
    sweep: SweepCurve = field(repr=False, compare=False)

    def to_dict(self, include_sweep: bool = False) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "method": self.method,
            "m": self.fc.m,
            "L": self.fc.L,
            "worst_rho": self.worst_rho,
            "argmax_lambda": self.argmax_lambda,
            "rho_star": self.rho_star,
            "gap": self.gap,
            "converging": self.converging,
        }
        if include_sweep:
            data["sweep"] = [list(sample) for sample in self.sweep.samples]
        return data


def _evaluate_grid(system: LiftedSystem, lambdas: np.ndarray, threads: Optional[int]) -> np.ndarray:
    workers = resolve_threads(threads)
    if workers <= 1 or lambdas.size < 1024:
        return spectral_radius_curve(system, lambdas)
    chunks = np.array_split(lambdas, workers)
    parts = ordered_map(lambda chunk: spectral_radius_curve(system, chunk), chunks, workers)
    return np.concatenate(parts)


def _strict_local_maxima(values: np.ndarray) -> np.ndarray:
    padded = np.concatenate([[-np.inf], values, [-np.inf]])
    return np.flatnonzero((values > padded[:-2]) & (values > padded[2:]))


def _refine_maxima(system: LiftedSystem, lo: np.ndarray, hi: np.ndarray,
                   width: float) -> Tuple[np.ndarray, np.ndarray]:
    """Golden-section maximisation on all brackets [lo_i, hi_i] at once."""
    a, b = lo.astype(float), hi.astype(float)
    c = b - (b - a) * INV_PHI
    d = a + (b - a) * INV_PHI
    fc = spectral_radius_curve(system, c)
    fd = spectral_radius_curve(system, d)
    best_x = np.where(fc >= fd, c, d)
    best_f = np.maximum(fc, fd)

    for _ in range(MAX_GOLDEN_ITERATIONS):
        if np.all(b - a <= width):
            break
        right = fc < fd
        new_a = np.where(right, c, a)
        new_b = np.where(right, b, d)
        span = new_b - new_a
        new_c = np.where(right, d, new_b - span * INV_PHI)
        new_d = np.where(right, new_a + span * INV_PHI, c)
        trial_point = np.where(right, new_d, new_c)
        fp = spectral_radius_curve(system, trial_point)
        fc, fd = np.where(right, fd, fp), np.where(right, fp, fc)
        a, b, c, d = new_a, new_b, new_c, new_d

        better = fp > best_f
        best_x = np.where(better, trial_point, best_x)
        best_f = np.maximum(best_f, fp)
    return best_x, best_f


def worst_case_rho(spec: MethodSpec, fc: FunctionClass, options: Optional[SweepConfig] = None,
                   threads: Optional[int] = None) -> RateReport:
    """
    Worst-case rate sup rho(g(lambda)) over lambda in [m, L].

    Args:
        spec: Valid method spec
        fc: Function class (m, L)
        options: Grid size, tie tolerance and refinement width
        threads: Optional cap on grid-evaluation workers

    Returns:
        RateReport; non-convergent methods are reported with converging=False
    """
    options = options or SweepConfig()
    system = build_structure(spec)
    target = rho_star(fc)

    if fc.is_degenerate:
        lambdas = np.array([fc.m])
    else:
        lambdas = np.linspace(fc.m, fc.L, options.grid_points)
    rhos = _evaluate_grid(system, lambdas, threads)

    positions, values = lambdas, rhos
    if lambdas.size > 1:
        peaks = _strict_local_maxima(rhos)
        if peaks.size:
            lo = lambdas[np.maximum(peaks - 1, 0)]
            hi = lambdas[np.minimum(peaks + 1, lambdas.size - 1)]
            width = options.refine_bracket * (fc.L - fc.m)
            refined_x, refined_f = _refine_maxima(system, lo, hi, width)
            positions = np.concatenate([lambdas, refined_x])
            values = np.concatenate([rhos, refined_f])
            logger.debug(f"{spec.label}: refined {peaks.size} local maxima")

    worst = float(np.max(values))
    ties = np.flatnonzero(values >= worst - options.tolerance)
    argmax = float(np.min(positions[ties]))

    report = RateReport(
        method=spec.label,
        fc=fc,
        worst_rho=worst,
        argmax_lambda=argmax,
        rho_star=target,
        gap=worst - target,
        converging=worst < 1.0,
        sweep=SweepCurve(lambdas=lambdas, rhos=rhos),
    )
    logger.info(f"{spec.label} on [{fc.m}, {fc.L}]: worst rho {worst:.12g} at lambda {argmax:.6g}")
    return report


@dataclass(frozen=True)
class LowerBoundReport:
    """Minimum worst-case rate over randomly drawn converging methods."""
    fc: FunctionClass
    samples: int
    converging: int
    min_worst_rho: Optional[float]
    rho_star: float
    tolerance: float
    best_method: Optional[MethodSpec] = None
    violations: Tuple[int, ...] = ()

    @property
    def margin(self) -> Optional[float]:
        if self.min_worst_rho is None:
            return None
        return self.min_worst_rho - self.rho_star

    @property
    def passed(self) -> bool:
        return not self.violations

    def check(self) -> None:
        """Raise if any converging sample beat rho*."""
        if self.violations:
            raise RuntimeError(
                f"{len(self.violations)} sampled methods fall below rho*={self.rho_star} "
                f"(samples {list(self.violations)[:10]})"
            )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "m": self.fc.m,
            "L": self.fc.L,
            "samples": self.samples,
            "converging": self.converging,
            "min_worst_rho": self.min_worst_rho,
            "rho_star": self.rho_star,
            "margin": self.margin,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "violations": list(self.violations),
            "best_method": self.best_method.to_dict() if self.best_method else None,
        }


def random_method(rng: np.random.Generator, config: Optional[SamplerConfig] = None,
                  name: Optional[str] = None) -> MethodSpec:
    """
    Draw a method satisfying sum(gamma) = 1 and sum(alpha) != 0.

    k uniform on 1..max_k, l uniform on 0..k; beta and gamma uniform on [-b, b],
    gamma shifted to sum to one; alpha uniform on [-b, b] times alpha_scale,
    redrawn while |sum(alpha)| < min_alpha_sum * alpha_scale.
    """
    config = config or SamplerConfig()
    bound = config.coefficient_bound
    k = int(rng.integers(1, config.max_k + 1))
    l = int(rng.integers(0, k + 1))

    beta = rng.uniform(-bound, bound, k)
    gamma = rng.uniform(-bound, bound, k - l + 1)
    gamma = gamma - (gamma.sum() - 1.0) / gamma.size
    gamma[-1] = 1.0 - math.fsum(gamma[:-1])

    while True:
        alpha = rng.uniform(-bound, bound, l + 1) * config.alpha_scale
        if abs(alpha.sum()) >= config.min_alpha_sum * config.alpha_scale:
            break
        logger.debug("Resampling alpha with near-zero sum")
    return MethodSpec(k=k, l=l, alpha=alpha, beta=beta, gamma=gamma, name=name)


def certify_lower_bound(samples: int, fc: FunctionClass, seed: int,
                        sweep: Optional[SweepConfig] = None,
                        sampler: Optional[SamplerConfig] = None,
                        threads: Optional[int] = None,
                        min_converging: Optional[int] = None,
                        max_samples: Optional[int] = None) -> LowerBoundReport:
    """
    Check sup rho(g) >= rho* on `samples` random methods.

    Sample i uses the generator seeded with (seed, i), so the report does not
    depend on the evaluation order or the number of workers.

    With min_converging, further batches of `samples` draws are taken until that
    many converging methods were seen or max_samples draws (default
    50 * max(samples, min_converging)) are spent.
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    if min_converging is not None and min_converging < 1:
        raise ValueError(f"min_converging must be >= 1, got {min_converging}")
    sampler = sampler or SamplerConfig()
    sweep = sweep or SweepConfig()

    def evaluate(index: int) -> Tuple[MethodSpec, RateReport]:
        rng = np.random.default_rng([seed, index])
        spec = random_method(rng, sampler, name=f"sample-{index}")
        return spec, worst_case_rho(spec, fc, sweep, threads=1)

    results = ordered_map(evaluate, range(samples), threads)
    if min_converging is not None:
        limit = max_samples or 50 * max(samples, min_converging)
        count = sum(report.converging for _, report in results)
        while count < min_converging and len(results) < limit:
            start = len(results)
            batch = ordered_map(evaluate, range(start, min(start + samples, limit)), threads)
            count += sum(report.converging for _, report in batch)
            results.extend(batch)
            logger.debug(f"{count}/{min_converging} converging after {len(results)} draws")
        if count < min_converging:
            logger.warning(f"Only {count} converging methods in {len(results)} draws (wanted {min_converging})")
    drawn = len(results)

    target = rho_star(fc)
    converging = [(i, spec, report) for i, (spec, report) in enumerate(results) if report.converging]
    violations = tuple(
        i for i, _, report in converging
        if report.worst_rho < target - sampler.bound_tolerance
    )
    for i in violations:
        logger.error(f"Sample {i} beats rho*: worst rho {results[i][1].worst_rho!r} < {target!r}")

    if not converging:
        logger.warning(f"No converging method among {drawn} samples")
        return LowerBoundReport(
            fc=fc, samples=drawn, converging=0, min_worst_rho=None,
            rho_star=target, tolerance=sampler.bound_tolerance,
        )

    _, best_spec, best_report = min(converging, key=lambda item: item[2].worst_rho)
    report = LowerBoundReport(
        fc=fc,
        samples=drawn,
        converging=len(converging),
        min_worst_rho=best_report.worst_rho,
        rho_star=target,
        tolerance=sampler.bound_tolerance,
        best_method=best_spec,
        violations=violations,
    )
    logger.info(
        f"Lower bound on [{fc.m}, {fc.L}]: {report.converging}/{drawn} converging, "
        f"min worst rho {report.min_worst_rho:.10g} vs rho* {target:.10g}"
    )
    return report
