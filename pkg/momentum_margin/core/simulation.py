"""
Simulation of fixed-parameter methods on concrete quadratic instances.

A run iterates

    x_{t+1} = x_t + sum_j beta_j (x_{t-j} - x_{t-j-1}) - sum_j alpha_j grad f(y_{t-j}),
    y_t = sum_nu gamma_nu x_{t-nu},

with the exact gradient H (y - x*), records ||x_t - x*|| and estimates the
root-convergence factor limsup ||x_t - x*||^(1/t) from the tail of the trace.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Union
import logging

import numpy as np
import pandas as pd
from scipy import stats

from .config import SimulationConfig
from .lifting import QuadraticInstance, build_structure
from .method_spec import FunctionClass, MethodSpec, advance, constant_history, require_valid
from .spectral_analysis import spectral_radius_curve
from ..utils import ordered_map

logger = logging.getLogger(__name__)

SPECTRUM_POLICIES = ("endpoints", "uniform")
START_POLICIES = ("constant", "random", "fixed-point")

Seed = Union[int, Sequence[int]]


def _distances(deviations: np.ndarray) -> np.ndarray:
    """Row-wise Euclidean norms, scaled so entries near the distance floor do not underflow."""
    deviations = np.atleast_2d(deviations)
    scale = np.max(np.abs(deviations), axis=1)
    safe = np.where((scale > 0.0) & np.isfinite(scale), scale, 1.0)
    scaled = deviations / safe[:, None]
    return np.where(safe == scale, scale * np.sqrt(np.sum(scaled * scaled, axis=1)), scale)


def _spectrum(n: int, fc: FunctionClass, rng: np.random.Generator, policy: str) -> np.ndarray:
    if policy == "endpoints":
        # alternate m, L so both bounds are present whenever n >= 2
        return np.where(np.arange(n) % 2 == 0, fc.m, fc.L).astype(float)
    if policy == "uniform":
        values = rng.uniform(fc.m, fc.L, n)
        if n >= 2:
            low, high = int(np.argmin(values)), int(np.argmax(values))
            if low == high:
                high = (low + 1) % n
            values[low], values[high] = fc.m, fc.L
        return values
    raise ValueError(f"Unknown spectrum policy {policy!r}; expected one of {SPECTRUM_POLICIES}")


def make_quadratic(n: int, fc: FunctionClass, seed: Seed, spectrum: str = "endpoints") -> QuadraticInstance:
    """
    Random quadratic H = T^T diag(lambda) T with a seeded orthogonal T.

    Args:
        n: Dimension
        fc: Function class bounding the spectrum
        seed: Integer seed (or seed sequence) of the instance
        spectrum: 'endpoints' (eigenvalues m, L, m, ...) or 'uniform' (pinned to m and L)

    Returns:
        QuadraticInstance with a standard-normal minimizer and f0 = 0
    """
    if n < 1:
        raise ValueError(f"Dimension must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    eigenvalues = _spectrum(n, fc, rng, spectrum)
    if n >= 2:
        basis = stats.ortho_group.rvs(n, random_state=rng)
    else:
        basis = np.ones((1, 1))
    hessian = basis.T @ np.diag(eigenvalues) @ basis
    hessian = (hessian + hessian.T) / 2.0
    minimizer = rng.standard_normal(n)
    return QuadraticInstance(hessian=hessian, minimizer=minimizer, offset=0.0, fc=fc)


def random_history(spec: MethodSpec, quadratic: QuadraticInstance, rng: np.random.Generator,
                   scale: float = 1.0) -> np.ndarray:
    """k+1 independent Gaussian iterates around x*."""
    noise = rng.standard_normal((spec.k + 1, quadratic.dimension))
    return quadratic.minimizer + scale * noise


def initial_history(spec: MethodSpec, quadratic: QuadraticInstance, start: str,
                    rng: np.random.Generator) -> np.ndarray:
    """Starting window for a start policy (constant, random or fixed-point)."""
    if start == "constant":
        return constant_history(spec, quadratic.minimizer + rng.standard_normal(quadratic.dimension))
    if start == "random":
        return random_history(spec, quadratic, rng)
    if start == "fixed-point":
        return constant_history(spec, quadratic.minimizer)
    raise ValueError(f"Unknown start policy {start!r}; expected one of {START_POLICIES}")


@dataclass(frozen=True, eq=False)
class SimulationTrace:
    """Distances ||x_t - x*|| of one run and the rates derived from them."""
    method: str
    distances: np.ndarray
    empirical_r: float
    predicted_r: float
    truncated_at: int
    steps: int
    diverged: bool = False
    metadata: Dict[str, Any] = field(default_factory=dict, compare=False)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": np.arange(self.distances.size), "distance": self.distances})

    def to_dict(self) -> Dict[str, Any]:
        return {
            "method": self.method,
            "steps": self.steps,
            "truncated_at": self.truncated_at,
            "empirical_r": self.empirical_r,
            "predicted_r": self.predicted_r,
            "diverged": self.diverged,
            **self.metadata,
        }


def estimate_r_factor(distances: Sequence[float], min_points: int = 20) -> float:
    """
    Tail estimate of limsup ||x_t - x*||^(1/t).

    Fits a least-squares line to (t, log d_t) over the last half of the
    nonzero prefix of the trace and returns exp(slope).

    Raises:
        ValueError: fewer than min_points usable entries
    """
    values = np.asarray(distances, dtype=float).reshape(-1)
    unusable = np.flatnonzero(~(np.isfinite(values) & (values > 0.0)))
    prefix = values[:unusable[0]] if unusable.size else values
    if prefix.size < min_points:
        raise ValueError(
            f"Need at least {min_points} nonzero distances to estimate the R-factor, got {prefix.size}"
        )
    start = prefix.size // 2
    t = np.arange(start, prefix.size, dtype=float)
    fit = stats.linregress(t, np.log(prefix[start:]))
    return float(np.exp(fit.slope))


def run(spec: MethodSpec, quadratic: QuadraticInstance, x0_history: Optional[np.ndarray] = None,
        steps: int = 500, floor: float = 1e-300, min_points: int = 20) -> SimulationTrace:
    """
    Iterate the method on a quadratic instance.

    Args:
        spec: Valid method spec
        quadratic: Instance providing H and x*
        x0_history: (k+1, n) window with x0_history[j] = x_{-j}; defaults to x* + 1 repeated
        steps: Number of iterations T
        floor: Runs stop once the whole window is closer than this to x*
        min_points: Minimum usable distances for the R-factor fit

    Returns:
        SimulationTrace with distances for t = 0 .. truncated_at
    """
    require_valid(spec)
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    n = quadratic.dimension
    if x0_history is None:
        history = constant_history(spec, quadratic.minimizer + 1.0)
    else:
        history = np.array(x0_history, dtype=float)
    if history.shape != (spec.k + 1, n):
        raise ValueError(
            f"Dimension mismatch: history must have shape {(spec.k + 1, n)}, got {history.shape}"
        )

    hessian = quadratic.hessian
    # e_t = x_t - x* obeys the same update with x* = 0 (affine step, sum(gamma) = 1);
    # iterating on x_t directly would stall at eps * ||x*||
    deviation = history - quadratic.minimizer
    origin = np.zeros(n)
    window = _distances(deviation)
    distances = [float(window[0])]
    truncated_at = steps
    diverged = False

    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(steps):
            if np.max(window) < floor:
                truncated_at = t
                break
            e_next = advance(spec, deviation, hessian, origin)
            distance = float(_distances(e_next)[0])
            if not np.isfinite(distance):
                truncated_at = t
                diverged = True
                logger.warning(f"{spec.label}: iterates overflowed at step {t + 1}")
                break
            deviation = np.vstack([e_next[None, :], deviation[:-1]])
            window = np.concatenate([[distance], window[:-1]])
            distances.append(distance)

    distances = np.asarray(distances)
    predicted = float(np.max(spectral_radius_curve(build_structure(spec), quadratic.eigenvalues)))

    if not np.any(distances > 0.0):
        empirical = 0.0
    else:
        try:
            empirical = estimate_r_factor(distances, min_points)
        except ValueError as exc:
            logger.warning(f"{spec.label}: {exc}; reporting empirical R-factor 0")
            empirical = 0.0
    diverged = diverged or empirical > 1.0

    logger.info(
        f"{spec.label}: {distances.size - 1} steps, empirical r {empirical:.6g}, predicted {predicted:.6g}"
    )
    return SimulationTrace(
        method=spec.label,
        distances=distances,
        empirical_r=empirical,
        predicted_r=predicted,
        truncated_at=truncated_at,
        steps=steps,
        diverged=diverged,
    )


def run_trials(spec: MethodSpec, fc: FunctionClass, trials: int, seed: int,
               config: Optional[SimulationConfig] = None,
               threads: Optional[int] = None) -> List[SimulationTrace]:
    """
    Independent runs on seeded instances; trial i uses the seed (seed, i).

    Results are in trial order regardless of the number of workers.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    config = config or SimulationConfig()

    def simulate(index: int) -> SimulationTrace:
        quadratic = make_quadratic(config.dim, fc, [seed, index], config.spectrum)
        rng = np.random.default_rng([seed, index, 1])
        history = initial_history(spec, quadratic, config.start, rng)
        trace = run(spec, quadratic, history, config.steps, config.distance_floor, config.min_points)
        trace.metadata.update({"trial": index, "seed": seed})
        return trace

    return ordered_map(simulate, range(trials), threads)


def process_r_factor(traces: Sequence[SimulationTrace]) -> float:
    """R-factor of the process: the largest empirical R-factor over the runs."""
    if not traces:
        raise ValueError("process_r_factor needs at least one trace")
    return max(trace.empirical_r for trace in traces)
