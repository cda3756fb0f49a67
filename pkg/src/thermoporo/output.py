"""
Result files

- ProfileCSV: one sampled profile per column, coordinate first
- Summary tables: one row of scalar results per solve or sweep case
- Run manifests: JSON listing the files of a run and its resolved config

CSV files are comma-separated with a header row and LF line endings.
Numbers use 17 significant digits by default, which round-trips doubles.
"""

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence, Union

import numpy as np
from numpy.typing import ArrayLike

from .error_handler import ShapeError
from .logger import get_logger
from .numerics import FloatArray

logger = get_logger(__name__)

DEFAULT_PRECISION = 17

PathLike = Union[str, Path]


def format_number(value: float, precision: int = DEFAULT_PRECISION) -> str:
    return f"{value:.{precision}g}"


def _format_cell(value: Any, precision: int) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_number(float(value), precision)
    return str(value)


@dataclass
class ProfileCSV:
    """Profiles sharing one coordinate column."""

    columns: dict[str, FloatArray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.columns:
            raise ShapeError("a profile table needs at least the coordinate column")
        arrays = {k: np.asarray(v, dtype=np.float64) for k, v in self.columns.items()}
        lengths = {a.shape for a in arrays.values()}
        if len(lengths) != 1 or next(iter(lengths)) == () or len(next(iter(lengths))) != 1:
            raise ShapeError(f"profile columns must be 1D and of equal length, got {lengths}")
        coordinate = next(iter(arrays.values()))
        if np.any(np.diff(coordinate) <= 0):
            raise ShapeError("the coordinate column must be strictly increasing")
        self.columns = arrays

    @classmethod
    def from_columns(cls, columns: Mapping[str, ArrayLike]) -> "ProfileCSV":
        return cls({k: np.asarray(v, dtype=np.float64) for k, v in columns.items()})

    @property
    def header(self) -> list[str]:
        return list(self.columns)

    def write(self, path: PathLike, precision: int = DEFAULT_PRECISION) -> Path:
        """Write the table; parent directories are created."""
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        data = list(self.columns.values())
        with target.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(self.header)
            for i in range(len(data[0])):
                writer.writerow([format_number(float(col[i]), precision) for col in data])
        logger.debug(
            f"Wrote profile CSV {target}",
            extra={"path": str(target), "rows": len(data[0]), "columns": len(data)},
        )
        return target

    @classmethod
    def read(cls, path: PathLike) -> "ProfileCSV":
        with Path(path).open("r", encoding="utf-8", newline="") as handle:
            rows = list(csv.reader(handle))
        if not rows:
            raise ShapeError(f"empty CSV file: {path}")
        header, body = rows[0], rows[1:]
        values = np.array([[float(cell) for cell in row] for row in body], dtype=np.float64)
        values = values.reshape(len(body), len(header))
        return cls({name: values[:, j].copy() for j, name in enumerate(header)})


def write_table(
    path: PathLike, rows: Sequence[Mapping[str, Any]], precision: int = DEFAULT_PRECISION
) -> Path:
    """
    Write one CSV row per mapping; columns follow the first row's keys.

    Raises:
        ShapeError: If rows disagree on their keys
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    header = list(rows[0]) if rows else []
    for row in rows:
        if list(row) != header:
            raise ShapeError(f"table rows must share columns {header}, got {list(row)}")
    with target.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(row[k], precision) for k in header])
    return target


def read_table(path: PathLike) -> list[dict[str, str]]:
    with Path(path).open("r", encoding="utf-8", newline="") as handle:
        return list(csv.DictReader(handle))


def _jsonable(value: Any) -> Any:
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if math.isfinite(v) else str(v)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, Mapping):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def write_manifest(path: PathLike, payload: Mapping[str, Any]) -> Path:
    """Write a JSON manifest with sorted keys and LF line endings."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True)
    target.write_text(text + "\n", encoding="utf-8", newline="\n")
    return target
