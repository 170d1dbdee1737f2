"""
Result export - JSON reports, CSV curves and traces, human-readable tables
"""
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, TextIO, Union
import json
import logging
import math

import numpy as np
import pandas as pd

from . import FileManager

logger = logging.getLogger(__name__)


def _plain(value: Any) -> Any:
    """Convert numpy scalars/arrays and non-finite floats into JSON-safe values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        return _plain(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


class ResultExporter:
    """Export reports and curves to various formats."""

    def __init__(self, float_format: Optional[str] = None):
        self.float_format = float_format

    @staticmethod
    def to_json(data: Dict[str, Any]) -> str:
        """Deterministic JSON text: sorted keys, two-space indent, trailing newline."""
        return json.dumps(_plain(data), indent=2, sort_keys=True) + "\n"

    def to_csv(self, frame: pd.DataFrame) -> str:
        """CSV text with header row, '.' decimals and '\\n' row terminators."""
        return frame.to_csv(index=False, lineterminator="\n", float_format=self.float_format)

    @staticmethod
    def render_table(rows: Union[Dict[str, Any], Sequence[Dict[str, Any]]],
                     columns: Optional[List[str]] = None) -> str:
        """
        Render a report dictionary (key/value pairs) or a list of row dictionaries.

        Nested values are shown through their JSON text; floats use 10 significant digits.
        """
        def cell(value: Any) -> str:
            if isinstance(value, float):
                return f"{value:.10g}"
            if isinstance(value, (dict, list)):
                return json.dumps(_plain(value))
            return str(value)

        if isinstance(rows, dict):
            width = max((len(key) for key in rows), default=0)
            return "\n".join(f"{key:<{width}}  {cell(rows[key])}" for key in rows) + "\n"

        rows = list(rows)
        columns = columns or (list(rows[0].keys()) if rows else [])
        body = [[cell(row.get(col)) for col in columns] for row in rows]
        widths = [max([len(col)] + [len(line[i]) for line in body]) for i, col in enumerate(columns)]
        lines = ["  ".join(col.ljust(w) for col, w in zip(columns, widths))]
        lines.append("  ".join("-" * w for w in widths))
        lines.extend("  ".join(text.ljust(w) for text, w in zip(line, widths)) for line in body)
        return "\n".join(lines) + "\n"

    def write_json(self, data: Dict[str, Any], target: Union[Path, TextIO, None] = None) -> str:
        return self._emit(self.to_json(data), target)

    def write_csv(self, frame: pd.DataFrame, target: Union[Path, TextIO, None] = None) -> str:
        return self._emit(self.to_csv(frame), target)

    def write_table(self, rows: Union[Dict[str, Any], Sequence[Dict[str, Any]]],
                    target: Union[Path, TextIO, None] = None,
                    columns: Optional[List[str]] = None) -> str:
        return self._emit(self.render_table(rows, columns), target)

    def _emit(self, text: str, target: Union[Path, TextIO, None]) -> str:
        if target is None:
            return text
        if isinstance(target, (str, Path)):
            path = Path(target)
            if path.parent != Path("."):
                FileManager.ensure_directory(path.parent)
            with open(path, "w", newline="") as f:
                f.write(text)
            logger.info(f"Wrote {path}")
        else:
            target.write(text)
        return text
