"""Gridded surfaces: a level lattice plus one or two value matrices."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import DomainError

BOUND_SLACK = 1e-9


class Measure(str, enum.Enum):
    Z = "Z"
    I = "I"  # noqa: E741
    I12 = "I12"
    I21 = "I21"
    VBZC = "VBZC"
    L = "L"


class Provenance(str, enum.Enum):
    ANALYTIC = "analytic"
    QUADRATURE = "quadrature"
    EMPIRICAL = "empirical"


_BOUNDED = {Measure.Z, Measure.I, Measure.I12, Measure.I21, Measure.VBZC, Measure.L}


@dataclass(frozen=True)
class SurfaceGrid:
    """Values on the lattice ``u1_levels x u2_levels``.

    ``values[i, j]`` belongs to ``(u1_levels[i], u2_levels[j])``. Vector
    measures (``VBZC``) keep ``I12`` in ``values`` and ``I21`` in
    ``values2``. Missing cells are ``nan``.
    """

    u1_levels: np.ndarray
    u2_levels: np.ndarray
    values: np.ndarray
    measure: Measure
    provenance: Provenance
    values2: np.ndarray | None = None
    n: int | None = None
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        u1 = np.asarray(self.u1_levels, dtype=float)
        u2 = np.asarray(self.u2_levels, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "u1_levels", u1)
        object.__setattr__(self, "u2_levels", u2)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "measure", Measure(self.measure))
        object.__setattr__(self, "provenance", Provenance(self.provenance))
        if np.any(np.diff(u1) <= 0) or np.any(np.diff(u2) <= 0):
            raise DomainError("level lists must be strictly increasing")
        if vals.shape != (u1.size, u2.size):
            raise DomainError(f"values shape {vals.shape} does not match levels ({u1.size}, {u2.size})")
        mats = [vals]
        if self.values2 is not None:
            v2 = np.asarray(self.values2, dtype=float)
            if v2.shape != vals.shape:
                raise DomainError("values2 shape does not match values")
            object.__setattr__(self, "values2", v2)
            mats.append(v2)
        elif self.measure is Measure.VBZC:
            raise DomainError("a VBZC grid needs both component matrices")
        if self.measure in _BOUNDED:
            for m in mats:
                finite = m[np.isfinite(m)]
                if finite.size and (finite.min() < -BOUND_SLACK or finite.max() > 1 + BOUND_SLACK):
                    raise DomainError(f"{self.measure.value} values leave [0, 1]: range [{finite.min()}, {finite.max()}]")

    @property
    def is_vector(self) -> bool:
        return self.values2 is not None

    @property
    def n_missing(self) -> int:
        count = int(np.isnan(self.values).sum())
        if self.values2 is not None:
            count += int(np.isnan(self.values2).sum())
        return count

    def component(self, name: str) -> np.ndarray:
        if name in ("I21", "values2"):
            if self.values2 is None:
                raise KeyError(name)
            return self.values2
        return self.values

    def slice(self, fix: str, at: float, tol: float = 1e-12) -> "SurfaceSlice":
        """The row at a fixed ``u1`` or the column at a fixed ``u2``."""
        if fix not in ("u1", "u2"):
            raise DomainError("fix must be 'u1' or 'u2'")
        levels = self.u1_levels if fix == "u1" else self.u2_levels
        hits = np.flatnonzero(np.abs(levels - at) <= tol)
        if hits.size == 0:
            raise DomainError(f"{fix}={at} is not a lattice level; available: {levels.tolist()}")
        k = int(hits[0])
        free = self.u2_levels if fix == "u1" else self.u1_levels
        take = (lambda m: m[k, :]) if fix == "u1" else (lambda m: m[:, k])
        return SurfaceSlice(
            fix=fix,
            at=float(levels[k]),
            levels=free.copy(),
            values=take(self.values).copy(),
            values2=None if self.values2 is None else take(self.values2).copy(),
        )


@dataclass(frozen=True)
class SurfaceSlice:
    fix: str
    at: float
    levels: np.ndarray
    values: np.ndarray
    values2: np.ndarray | None = None

    @property
    def free(self) -> str:
        return "u2" if self.fix == "u1" else "u1"
