"""
Rate Engine - facade over the rate analysis, margin certificate and simulation
"""
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union
import logging

import numpy as np

from .config import Config
from .gain_margin import FeasibilityReport, MarginProblem, pick_feasible
from .method_spec import FunctionClass, MethodSpec, preset, require_valid
from .simulation import SimulationTrace, initial_history, make_quadratic, process_r_factor, run, run_trials
from .spectral_analysis import LowerBoundReport, RateReport, certify_lower_bound, worst_case_rho
from ..utils import FileManager

logger = logging.getLogger(__name__)

MethodSource = Union[str, Path, MethodSpec]


class RateEngine:
    """Main engine class tying a Config to the analysis operations."""

    def __init__(self, config: Optional[Config] = None):
        self.config = config or Config()
        self.results: Dict[str, Any] = {}

    def resolve_method(self, source: MethodSource, fc: FunctionClass) -> MethodSpec:
        """
        Turn a preset name, a spec-file path or a MethodSpec into a valid MethodSpec.

        Raises:
            KeyError: unknown preset name
            ValueError: the method violates the method-class assumptions
        """
        if isinstance(source, MethodSpec):
            spec = source
        elif isinstance(source, Path) or FileManager.validate_extension(Path(str(source)), ["json"]):
            spec = MethodSpec.from_file(Path(source))
        else:
            spec = preset(str(source), fc)
        require_valid(spec)
        return spec

    def analyze(self, source: MethodSource, fc: FunctionClass) -> RateReport:
        spec = self.resolve_method(source, fc)
        report = worst_case_rho(spec, fc, self.config.sweep, threads=self.config.threads)
        self.results["analyze"] = report
        return report

    def compare(self, sources: Sequence[MethodSource], fc: FunctionClass) -> List[RateReport]:
        """Worst-case rates of several methods, best first (ties keep input order)."""
        reports = [self.analyze(source, fc) for source in sources]
        reports.sort(key=lambda report: report.worst_rho)
        self.results["compare"] = reports
        return reports

    def sweep(self, source: MethodSource, fc: FunctionClass) -> RateReport:
        """Analysis whose report carries the full (lambda, rho) grid."""
        return self.analyze(source, fc)

    def certify(self, fc: FunctionClass, rho: float) -> FeasibilityReport:
        report = pick_feasible(MarginProblem(fc, rho))
        self.results["certify"] = report
        return report

    def simulate(self, source: MethodSource, fc: FunctionClass, seed: int) -> SimulationTrace:
        """One run on a seeded instance with the configured dimension, spectrum and start."""
        spec = self.resolve_method(source, fc)
        options = self.config.simulation
        quadratic = make_quadratic(options.dim, fc, seed, options.spectrum)
        history = initial_history(spec, quadratic, options.start, np.random.default_rng([seed, 1]))
        trace = run(spec, quadratic, history, options.steps, options.distance_floor, options.min_points)
        trace.metadata.update({"seed": seed, "dim": options.dim, "spectrum": options.spectrum,
                               "start": options.start, "m": fc.m, "L": fc.L})
        self.results["simulate"] = trace
        return trace

    def simulate_trials(self, source: MethodSource, fc: FunctionClass, trials: int,
                        seed: int) -> Dict[str, Any]:
        """Seeded runs and the process R-factor over them."""
        spec = self.resolve_method(source, fc)
        traces = run_trials(spec, fc, trials, seed, self.config.simulation, self.config.threads)
        summary = {
            "method": spec.label,
            "trials": trials,
            "process_r": process_r_factor(traces),
            "predicted_r": max(trace.predicted_r for trace in traces),
            "traces": traces,
        }
        self.results["simulate_trials"] = summary
        return summary

    def lower_bound(self, fc: FunctionClass, trials: int, seed: int,
                    min_converging: Optional[int] = None) -> LowerBoundReport:
        report = certify_lower_bound(trials, fc, seed, self.config.sweep, self.config.sampler,
                                     threads=self.config.threads, min_converging=min_converging)
        self.results["lower_bound"] = report
        return report
