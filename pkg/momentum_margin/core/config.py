"""
Configuration management for momentum_margin
"""
from pathlib import Path
from dataclasses import dataclass, field, asdict, fields
from typing import Any, Dict, Optional
import json
import logging
import os

logger = logging.getLogger(__name__)

THREADS_ENV_VAR = "MOMENTUM_MARGIN_THREADS"


@dataclass
class SweepConfig:
    """Options of the worst-case sweep over the Hessian eigenvalue interval."""
    grid_points: int = 2001
    tolerance: float = 1e-9  # ties within this are resolved to the smallest lambda
    refine_bracket: float = 1e-12  # golden-section stop, relative to L - m

    def __post_init__(self):
        if self.grid_points < 2:
            raise ValueError(f"grid_points must be at least 2, got {self.grid_points}")
        if self.tolerance < 0 or self.refine_bracket <= 0:
            raise ValueError("tolerance must be non-negative and refine_bracket positive")


@dataclass
class SamplerConfig:
    """Distribution of random methods drawn by the lower-bound experiment."""
    max_k: int = 4
    coefficient_bound: float = 1.0  # alpha, beta, gamma drawn uniform on [-b, b]
    alpha_scale: float = 1.0
    min_alpha_sum: float = 1e-3  # relative to alpha_scale
    bound_tolerance: float = 1e-8

    def __post_init__(self):
        if self.max_k < 1:
            raise ValueError(f"max_k must be >= 1, got {self.max_k}")
        if self.coefficient_bound <= 0 or self.alpha_scale <= 0:
            raise ValueError("coefficient_bound and alpha_scale must be positive")


@dataclass
class SimulationConfig:
    """Configuration of simulation runs on quadratic instances."""
    steps: int = 500
    dim: int = 10
    spectrum: str = "endpoints"  # endpoints, uniform
    start: str = "constant"  # constant, random, fixed-point
    distance_floor: float = 1e-300
    min_points: int = 20


@dataclass
class ExportConfig:
    """Configuration for export settings."""
    directory: Path = Path(".")
    float_format: Optional[str] = None  # None keeps the shortest round-trip repr


@dataclass
class Config:
    """Main configuration container."""
    sweep: SweepConfig = field(default_factory=SweepConfig)
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    export: ExportConfig = field(default_factory=ExportConfig)
    threads: Optional[int] = None
    log_level: str = "WARNING"

    _SECTIONS = {
        "sweep": SweepConfig,
        "sampler": SamplerConfig,
        "simulation": SimulationConfig,
        "export": ExportConfig,
    }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Config":
        """Build a configuration from a (possibly partial) nested dictionary."""
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"Unknown configuration keys: {sorted(unknown)}")

        kwargs: Dict[str, Any] = {}
        for name, section_cls in cls._SECTIONS.items():
            section = dict(data.get(name) or {})
            section_keys = {f.name for f in fields(section_cls)}
            bad = set(section) - section_keys
            if bad:
                raise ValueError(f"Unknown keys in [{name}]: {sorted(bad)}")
            if section_cls is ExportConfig and "directory" in section:
                section["directory"] = Path(section["directory"])
            kwargs[name] = section_cls(**section)
        if data.get("threads") is not None:
            kwargs["threads"] = int(data["threads"])
        if "log_level" in data:
            kwargs["log_level"] = str(data["log_level"]).upper()
        return cls(**kwargs)

    @classmethod
    def from_file(cls, config_path: Path) -> "Config":
        """Load configuration from JSON file."""
        config_path = Path(config_path)
        if config_path.exists():
            with open(config_path, 'r') as f:
                return cls.from_dict(json.load(f))
        logger.warning(f"Config file {config_path} not found, using defaults")
        return cls()

    def from_env(self) -> "Config":
        """Overlay settings taken from the environment; returns self."""
        raw = os.environ.get(THREADS_ENV_VAR)
        if raw:
            try:
                threads = int(raw)
            except ValueError:
                logger.warning(f"Ignoring non-integer {THREADS_ENV_VAR}={raw!r}")
            else:
                if threads >= 1:
                    self.threads = threads if self.threads is None else min(self.threads, threads)
        return self

    def to_dict(self) -> Dict[str, Any]:
        export = asdict(self.export)
        export["directory"] = str(self.export.directory)
        return {
            'sweep': asdict(self.sweep),
            'sampler': asdict(self.sampler),
            'simulation': asdict(self.simulation),
            'export': export,
            'threads': self.threads,
            'log_level': self.log_level,
        }

    def to_file(self, config_path: Path) -> None:
        """Save configuration to JSON file."""
        with open(config_path, 'w') as f:
            json.dump(self.to_dict(), f, indent=2)
