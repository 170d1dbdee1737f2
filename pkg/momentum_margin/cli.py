"""
Command-line front end: momentum-margin {analyze, compare, sweep, certify, simulate, lowerbound}

Exit codes: 0 success / converging / feasible, 1 input error, 2 negative verdict.
"""
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union
import argparse
import logging
import sys

import pandas as pd

from .core.config import Config
from .core.engine import RateEngine
from .core.method_spec import FunctionClass
from .templates import PresetLibrary
from .utils.export import ResultExporter

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_NEGATIVE = 2

DEFAULT_FORMATS = {"sweep": "csv", "simulate": "csv"}


@dataclass
class CommandConfig:
    """Parsed command line of one invocation."""
    command: str
    m: float
    L: float
    method_source: Union[str, Path, None] = None  # preset name or spec file
    presets: Optional[List[str]] = None
    output_path: Optional[Path] = None
    format: str = "table"
    seed: int = 0
    grid: Optional[int] = None
    steps: Optional[int] = None
    dim: Optional[int] = None
    spectrum: Optional[str] = None
    start: Optional[str] = None
    trials: Optional[int] = None
    converging: Optional[int] = None
    rho: Optional[float] = None
    threads: Optional[int] = None
    config_path: Optional[Path] = None
    log_level: Optional[str] = None

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "CommandConfig":
        presets = None
        if getattr(args, "presets", None):
            presets = [name.strip() for name in args.presets.split(",") if name.strip()]
        spec_file = getattr(args, "spec", None)
        method_source = Path(spec_file) if spec_file else getattr(args, "preset", None)
        return cls(
            command=args.command,
            m=args.m,
            L=args.L,
            method_source=method_source,
            presets=presets,
            output_path=Path(args.output) if args.output else None,
            format=args.format or DEFAULT_FORMATS.get(args.command, "table"),
            seed=args.seed,
            grid=args.grid,
            steps=getattr(args, "steps", None),
            dim=getattr(args, "dim", None),
            spectrum=getattr(args, "spectrum", None),
            start=getattr(args, "start", None),
            trials=getattr(args, "trials", None),
            converging=getattr(args, "converging", None),
            rho=getattr(args, "rho", None),
            threads=args.threads,
            config_path=Path(args.config) if args.config else None,
            log_level=args.log_level,
        )

    def function_class(self) -> FunctionClass:
        return FunctionClass(self.m, self.L)

    def build_config(self) -> Config:
        """File configuration, then the environment, then explicit flags."""
        config = Config.from_file(self.config_path) if self.config_path else Config()
        config.from_env()
        if self.grid is not None:
            config.sweep = replace(config.sweep, grid_points=self.grid)
        overrides = {name: getattr(self, name) for name in ("steps", "dim", "spectrum", "start")
                     if getattr(self, name) is not None}
        if overrides:
            config.simulation = replace(config.simulation, **overrides)
        if self.threads is not None:
            config.threads = self.threads
        if self.log_level:
            config.log_level = self.log_level.upper()
        return config


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--m", type=float, required=True, help="strong convexity modulus")
    common.add_argument("--L", type=float, required=True, help="largest Hessian eigenvalue")
    common.add_argument("--format", choices=("json", "csv", "table"), default=None)
    common.add_argument("--output", help="write the result here instead of stdout")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--grid", type=int, default=None, help="sweep grid points")
    common.add_argument("--threads", type=int, default=None, help="worker cap")
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--log-level", dest="log_level", default=None)

    method = argparse.ArgumentParser(add_help=False)
    source = method.add_mutually_exclusive_group(required=True)
    source.add_argument("--preset", choices=PresetLibrary.list_presets())
    source.add_argument("--spec", help="method spec JSON file")

    parser = argparse.ArgumentParser(
        prog="momentum-margin",
        description="Worst-case convergence rates of fixed-parameter first-order methods on quadratics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("analyze", parents=[common, method], help="worst-case rate of one method")

    compare = sub.add_parser("compare", parents=[common], help="rank several methods")
    compare.add_argument("--presets", default=None,
                         help="comma-separated preset names or spec files (default: all presets)")

    sub.add_parser("sweep", parents=[common, method], help="rho(g(lambda)) over [m, L]")

    certify = sub.add_parser("certify", parents=[common], help="Pick-matrix feasibility of a target rate")
    certify.add_argument("--rho", type=float, required=True)

    simulate = sub.add_parser("simulate", parents=[common, method], help="run on a seeded quadratic")
    simulate.add_argument("--steps", type=int, default=None)
    simulate.add_argument("--dim", type=int, default=None)
    simulate.add_argument("--spectrum", choices=("endpoints", "uniform"), default=None)
    simulate.add_argument("--start", choices=("constant", "random", "fixed-point"), default=None)
    simulate.add_argument("--trials", type=int, default=None,
                          help="several seeded runs; reports the process R-factor")

    lower = sub.add_parser("lowerbound", parents=[common], help="random-method lower-bound experiment")
    lower.add_argument("--trials", type=int, default=1000)
    lower.add_argument("--converging", type=int, default=None,
                       help="keep drawing batches of --trials until this many methods converge")
    return parser


def _emit(exporter: ResultExporter, command: CommandConfig, report: Dict[str, Any],
          frame: Optional[pd.DataFrame] = None, rows: Optional[Sequence[Dict[str, Any]]] = None) -> None:
    target = command.output_path
    if command.format == "json":
        text = exporter.write_json(report, target)
    elif command.format == "csv":
        if frame is None:
            frame = pd.DataFrame(list(rows) if rows is not None else [report])
        text = exporter.write_csv(frame, target)
    else:
        text = exporter.write_table(list(rows) if rows is not None else report, target)
    if target is None:
        sys.stdout.write(text)


def cmd_analyze(engine: RateEngine, command: CommandConfig, exporter: ResultExporter) -> int:
    report = engine.analyze(command.method_source, command.function_class())
    _emit(exporter, command, report.to_dict())
    return EXIT_OK if report.converging else EXIT_NEGATIVE


def cmd_compare(engine: RateEngine, command: CommandConfig, exporter: ResultExporter) -> int:
    sources = command.presets or PresetLibrary.list_presets()
    reports = engine.compare(sources, command.function_class())
    rows = [report.to_dict() for report in reports]
    columns = ["method", "worst_rho", "gap", "argmax_lambda", "converging"]
    table = [{key: row[key] for key in columns} for row in rows]
    if command.format == "json":
        _emit(exporter, command, {"m": command.m, "L": command.L, "methods": rows})
    else:
        _emit(exporter, command, {}, rows=table)
    return EXIT_OK


def cmd_sweep(engine: RateEngine, command: CommandConfig, exporter: ResultExporter) -> int:
    report = engine.sweep(command.method_source, command.function_class())
    frame = report.sweep.to_frame()
    if command.format == "json":
        _emit(exporter, command, report.to_dict(include_sweep=True))
    else:
        _emit(exporter, command, {}, frame=frame, rows=frame.to_dict("records"))
    return EXIT_OK


def cmd_certify(engine: RateEngine, command: CommandConfig, exporter: ResultExporter) -> int:
    report = engine.certify(command.function_class(), command.rho)
    _emit(exporter, command, report.to_dict())
    return EXIT_OK if report.feasible else EXIT_NEGATIVE


def cmd_simulate(engine: RateEngine, command: CommandConfig, exporter: ResultExporter) -> int:
    fc = command.function_class()
    if command.trials and command.trials > 1:
        summary = engine.simulate_trials(command.method_source, fc, command.trials, command.seed)
        rows = [trace.to_dict() for trace in summary.pop("traces")]
        if command.format == "json":
            _emit(exporter, command, {**summary, "runs": rows})
        else:
            _emit(exporter, command, {}, rows=rows)
        sys.stderr.write(f"process_r={summary['process_r']:.10g} predicted_r={summary['predicted_r']:.10g}\n")
        return EXIT_NEGATIVE if summary["process_r"] > 1.0 else EXIT_OK

    trace = engine.simulate(command.method_source, fc, command.seed)
    summary = trace.to_dict()
    if command.format == "csv":
        _emit(exporter, command, summary, frame=trace.to_frame())
        sys.stderr.write(f"empirical_r={trace.empirical_r:.10g} predicted_r={trace.predicted_r:.10g}\n")
    else:
        _emit(exporter, command, summary)
    return EXIT_NEGATIVE if trace.diverged else EXIT_OK


def cmd_lowerbound(engine: RateEngine, command: CommandConfig, exporter: ResultExporter) -> int:
    report = engine.lower_bound(command.function_class(), command.trials or 1000, command.seed,
                                min_converging=command.converging)
    _emit(exporter, command, report.to_dict())
    return EXIT_OK if report.passed else EXIT_NEGATIVE


HANDLERS = {
    "analyze": cmd_analyze,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
    "certify": cmd_certify,
    "simulate": cmd_simulate,
    "lowerbound": cmd_lowerbound,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT_ERROR

    try:
        command = CommandConfig.from_args(args)
        config = command.build_config()
        logging.basicConfig(
            level=getattr(logging, config.log_level, logging.WARNING),
            stream=sys.stderr,
            format="%(levelname)s %(name)s: %(message)s",
        )
        engine = RateEngine(config)
        if command.output_path is not None and not command.output_path.is_absolute():
            command.output_path = config.export.directory / command.output_path
        exporter = ResultExporter(config.export.float_format)
        return HANDLERS[command.command](engine, command, exporter)
    except KeyError as exc:
        message = exc.args[0] if exc.args else exc
        sys.stderr.write(f"error: {message}\n")
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
    return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
