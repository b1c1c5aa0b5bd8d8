"""Dataset loading, unit rescaling and surface serialization.

Surfaces are written either as JSON::

    {"measure": "I", "provenance": "analytic", "u1": [...], "u2": [...],
     "values": [[...], ...]}

(with ``"values2"`` added for the vector measure, and ``null`` for missing
cells) or as long CSV with one row per lattice point. Output is byte-stable:
keys are sorted and floats use their shortest round-trip representation.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .errors import ValidationError
from .grid import Measure, Provenance, SurfaceGrid, SurfaceSlice
from .models import BivariateSample

FIXTURE_NAME = "itu_schema_synthetic_2024.csv"
FIXTURE_X1 = "fixed_broadband_per_100"
FIXTURE_X2 = "basic_ict_skills_pct"
DEFAULT_LEVELS = tuple(round(0.2 + 0.1 * i, 10) for i in range(7))
SUMMARY_LEVELS = (0.2, 0.5, 0.8)


def fixture_path() -> Path:
    """Path of the shipped synthetic 23-row dataset (ITU column schema, invented values)."""
    return Path(str(resources.files("zenga") / "data" / FIXTURE_NAME))


@dataclass(frozen=True)
class DatasetSpec:
    """Where and how to read two positive columns. Without a header, columns are 0-based indices."""

    path: str | os.PathLike
    x1_col: str | int
    x2_col: str | int
    delimiter: str = ","
    has_header: bool = True


@dataclass(frozen=True)
class RunConfig:
    """Settings shared by the command-line drivers."""

    out: Path
    fmt: str = "json"
    levels: tuple[float, ...] = DEFAULT_LEVELS
    tol: float | None = None
    quiet: bool = False
    extra: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.fmt not in ("json", "csv_long"):
            raise ValidationError(f"format must be json or csv_long, got {self.fmt!r}")
        if any(not 0.0 < u < 1.0 for u in self.levels):
            raise ValidationError("grid levels must lie strictly inside (0, 1)")


def _column_index(header: list[str] | None, col: str | int, what: str) -> int:
    if header is None:
        try:
            return int(col)
        except (TypeError, ValueError):
            raise ValidationError(f"{what}: without a header the column must be an index, got {col!r}") from None
    if isinstance(col, int):
        return col
    names = [h.strip() for h in header]
    if col in names:
        return names.index(col)
    raise ValidationError(f"{what}: column {col!r} not found; available: {names}")


def load_dataset(spec: DatasetSpec) -> BivariateSample:
    """Read two numeric columns; rows are numbered from 1 in error messages, header excluded."""
    path = Path(spec.path)
    if not path.is_file():
        raise ValidationError(f"dataset not found: {path}")
    with path.open(encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh, delimiter=spec.delimiter))
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    header = None
    if spec.has_header:
        if not rows:
            raise ValidationError(f"{path}: file is empty")
        header, rows = rows[0], rows[1:]
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    i1 = _column_index(header, spec.x1_col, "x1")
    i2 = _column_index(header, spec.x2_col, "x2")
    x1, x2 = [], []
    for k, r in enumerate(rows, start=1):
        vals = []
        for idx, name in ((i1, "x1"), (i2, "x2")):
            if idx >= len(r) or not r[idx].strip():
                raise ValidationError(f"{name} is missing", row=k)
            try:
                v = float(r[idx])
            except ValueError:
                raise ValidationError(f"{name} is not a number: {r[idx]!r}", row=k) from None
            if not math.isfinite(v) or v <= 0:
                raise ValidationError(f"{name} must be finite and positive, got {r[idx].strip()}", row=k)
            vals.append(v)
        x1.append(vals[0])
        x2.append(vals[1])
    return BivariateSample(np.array(x1), np.array(x2))


def rescale_unit(sample: BivariateSample) -> tuple[BivariateSample, tuple[float, float]]:
    """Divide each coordinate by its column maximum; returns the sample and the two maxima."""
    s1 = float(np.max(sample.x1))
    s2 = float(np.max(sample.x2))
    return BivariateSample(sample.x1 / s1, sample.x2 / s2), (s1, s2)


# --------------------------------------------------------------------------- serialization


def _num(x: float) -> float | None:
    x = float(x)
    return None if math.isnan(x) else x


def _matrix(m: np.ndarray) -> list[list[float | None]]:
    return [[_num(v) for v in row] for row in m]


def surface_to_dict(grid: SurfaceGrid) -> dict[str, Any]:
    d: dict[str, Any] = {
        "measure": grid.measure.value,
        "provenance": grid.provenance.value,
        "u1": [float(u) for u in grid.u1_levels],
        "u2": [float(u) for u in grid.u2_levels],
        "values": _matrix(grid.values),
    }
    if grid.values2 is not None:
        d["values2"] = _matrix(grid.values2)
    if grid.n is not None:
        d["n"] = int(grid.n)
    return d


def surface_from_dict(d: dict[str, Any]) -> SurfaceGrid:
    def mat(m):
        return np.array([[math.nan if v is None else float(v) for v in row] for row in m], dtype=float)

    try:
        return SurfaceGrid(
            np.array(d["u1"], dtype=float),
            np.array(d["u2"], dtype=float),
            mat(d["values"]),
            Measure(d["measure"]),
            Provenance(d["provenance"]),
            values2=mat(d["values2"]) if "values2" in d else None,
            n=d.get("n"),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ValidationError(f"not a surface document: {exc}") from exc


def _cell(x: float) -> str:
    return "" if math.isnan(x) else repr(float(x))


def surface_to_csv(grid: SurfaceGrid) -> str:
    cols = ["u1", "u2"] + (["value12", "value21"] if grid.is_vector else ["value"])
    lines = [",".join(cols)]
    for i, a in enumerate(grid.u1_levels):
        for j, b in enumerate(grid.u2_levels):
            cells = [repr(float(a)), repr(float(b)), _cell(grid.values[i, j])]
            if grid.is_vector:
                cells.append(_cell(grid.values2[i, j]))
            lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def surface_to_json(grid: SurfaceGrid) -> str:
    return json.dumps(surface_to_dict(grid), sort_keys=True, indent=1, allow_nan=False) + "\n"


def emit_surface(grid: SurfaceGrid, fmt: str, path) -> Path:
    """Write ``grid`` as ``json`` or ``csv_long``; returns the path written."""
    if fmt == "json":
        text = surface_to_json(grid)
    elif fmt == "csv_long":
        text = surface_to_csv(grid)
    else:
        raise ValidationError(f"format must be json or csv_long, got {fmt!r}")
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def load_surface(path, measure: Measure | str | None = None, provenance: Provenance | str = Provenance.EMPIRICAL) -> SurfaceGrid:
    """Read a surface written by :func:`emit_surface`.

    Long CSV carries no measure tag: ``measure`` defaults to ``VBZC`` for two
    value columns and ``I`` otherwise.
    """
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"surface file not found: {path}")
    text = path.read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        try:
            return surface_from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
    rows = list(csv.DictReader(text.splitlines()))
    if not rows or not {"u1", "u2"} <= set(rows[0]):
        raise ValidationError(f"{path}: expected a long CSV with u1,u2 columns")
    vector = "value12" in rows[0]
    u1 = sorted({float(r["u1"]) for r in rows})
    u2 = sorted({float(r["u2"]) for r in rows})
    v = np.full((len(u1), len(u2)), np.nan)
    v2 = np.full_like(v, np.nan) if vector else None
    for r in rows:
        i, j = u1.index(float(r["u1"])), u2.index(float(r["u2"]))
        first = r["value12"] if vector else r["value"]
        v[i, j] = float(first) if first else np.nan
        if vector:
            v2[i, j] = float(r["value21"]) if r["value21"] else np.nan
    m = Measure(measure) if measure is not None else (Measure.VBZC if vector else Measure.I)
    return SurfaceGrid(np.array(u1), np.array(u2), v, m, Provenance(provenance), values2=v2)


def slice_to_csv(s: SurfaceSlice) -> str:
    cols = [s.free] + (["value12", "value21"] if s.values2 is not None else ["value"])
    lines = [f"# fixed {s.fix}={s.at!r}", ",".join(cols)]
    for k, lev in enumerate(s.levels):
        cells = [repr(float(lev)), _cell(s.values[k])]
        if s.values2 is not None:
            cells.append(_cell(s.values2[k]))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def summary_rows(grid: SurfaceGrid, levels: Sequence[float] = SUMMARY_LEVELS) -> list[tuple[float, float, float, float]]:
    """``(u1, u2, I12, I21)`` rows in the order ``u2`` outer, ``u1`` inner."""
    if not grid.is_vector:
        raise ValidationError("a 3x3 summary needs a VBZC grid")
    out = []
    for b in levels:
        j = _level_index(grid.u2_levels, b)
        for a in levels:
            i = _level_index(grid.u1_levels, a)
            out.append((float(a), float(b), float(grid.values[i, j]), float(grid.values2[i, j])))
    return out


def summary_to_csv(rows) -> str:
    lines = ["u1,u2,I12,I21"]
    lines += [f"{a!r},{b!r},{_cell(x)},{_cell(y)}" for a, b, x, y in rows]
    return "\n".join(lines) + "\n"


def _level_index(levels: np.ndarray, at: float) -> int:
    hits = np.flatnonzero(np.abs(levels - at) <= 1e-12)
    if hits.size == 0:
        raise ValidationError(f"level {at} is not on the grid {levels.tolist()}")
    return int(hits[0])


def write_text(path, text: str) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


__all__ = [
    "DEFAULT_LEVELS",
    "DatasetSpec",
    "RunConfig",
    "SUMMARY_LEVELS",
    "emit_surface",
    "fixture_path",
    "load_dataset",
    "load_surface",
    "rescale_unit",
    "slice_to_csv",
    "surface_from_dict",
    "surface_to_csv",
    "surface_to_dict",
    "surface_to_json",
    "summary_rows",
    "summary_to_csv",
]
