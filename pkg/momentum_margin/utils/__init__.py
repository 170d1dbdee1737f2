"""
momentum_margin utilities - file helpers and deterministic parallel evaluation
"""
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, List, Optional, TypeVar
import logging
import os

from ..core.config import THREADS_ENV_VAR

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class FileManager:
    """Utility class for file operations."""

    @staticmethod
    def ensure_directory(path: Path) -> Path:
        """Ensure directory exists, create if necessary."""
        path = Path(path)
        path.mkdir(parents=True, exist_ok=True)
        return path

    @staticmethod
    def get_file_extension(path: Path) -> str:
        """Get file extension without dot."""
        path = Path(path)
        return path.suffix[1:] if path.suffix else ""

    @staticmethod
    def validate_extension(path: Path, allowed: List[str]) -> bool:
        """Check if file has allowed extension."""
        return FileManager.get_file_extension(path) in allowed


def resolve_threads(requested: Optional[int] = None) -> int:
    """Worker count: the requested cap, else MOMENTUM_MARGIN_THREADS, else the CPU count."""
    if requested is not None and requested >= 1:
        return int(requested)
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw:
        try:
            value = int(raw)
            if value >= 1:
                return value
        except ValueError:
            logger.warning(f"Ignoring non-integer {THREADS_ENV_VAR}={raw!r}")
    return os.cpu_count() or 1


def ordered_map(func: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """Map func over items, concurrently when threads > 1; results keep input order."""
    items = list(items)
    workers = min(resolve_threads(threads), max(len(items), 1))
    if workers <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
