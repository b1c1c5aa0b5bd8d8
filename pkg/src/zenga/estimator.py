"""Nonparametric estimators of the VBZC from paired observations.

For ``I12`` at ``(u1, u2)``: keep the rows whose ``X2`` strictly exceeds the
type-1 empirical ``u2``-quantile, sort their ``X1`` values, and integrate the
empirical quantile function of that subsample up to ``u1``. ``I21`` swaps the
coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConditioningEmptyError, DegenerateDenominatorError, DomainError, EmptySampleError, ZengaError
from .grid import Measure, Provenance, SurfaceGrid, SurfaceSlice
from .models import BivariateSample
from .numerics import as_point
from .vbzc import Direction, VbzcPoint

# n*u within this relative distance of an integer is treated as that integer,
# so levels such as 0.3 with n = 10 hit the intended order statistic
_SNAP = 1e-9
_ZERO_COEF = 1e-12


def _snap(x: float) -> float:
    r = round(x)
    return float(r) if abs(x - r) <= _SNAP * max(1.0, abs(x)) else x


def empirical_quantile(values: Sequence[float] | np.ndarray, u: float) -> float:
    """Type-1 empirical quantile: the ``ceil(n u)``-th order statistic of sorted ``values``."""
    v = np.asarray(values, dtype=float)
    n = v.size
    if n == 0:
        raise EmptySampleError("empirical quantile of an empty sample")
    if not 0.0 < u < 1.0:
        raise DomainError(f"level must lie in (0, 1), got {u}")
    k = max(1, math.ceil(_snap(n * u)))
    return float(v[k - 1])


@dataclass(frozen=True)
class TailSubsample:
    """Sorted values of one coordinate over the rows where the other exceeds its quantile."""

    direction: Direction
    threshold_level: float
    threshold: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.size < 1:
            raise ConditioningEmptyError("tail subsample is empty")
        if np.any(np.diff(v) < 0):
            raise DomainError("tail subsample values must be sorted")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def size(self) -> int:
        return int(self.values.size)

    def mean(self) -> float:
        return math.fsum(self.values.tolist()) / self.size


def tail_subsample(sample: BivariateSample, direction, u: float) -> TailSubsample:
    """Rows with the conditioning coordinate strictly above its empirical ``u``-quantile.

    Direction ``12`` conditions on ``X2`` and keeps ``X1``; ``21`` the reverse.
    Ties in the kept coordinate are sorted stably (input order).
    """
    d = direction if isinstance(direction, Direction) else Direction(str(direction))
    cond, kept = (sample.x2, sample.x1) if d is Direction.D12 else (sample.x1, sample.x2)
    thr = empirical_quantile(np.sort(cond, kind="stable"), u)
    keep = kept[cond > thr]
    if keep.size == 0:
        raise ConditioningEmptyError(
            f"no observation exceeds the {u}-quantile {thr!r} of the conditioning coordinate (n={sample.n})"
        )
    return TailSubsample(d, float(u), thr, np.sort(keep, kind="stable"))


def estimate_lower_partial_mean(sub: TailSubsample, u1: float) -> float:
    """``(1/u1)`` times the integral of the subsample's empirical quantile over ``[0, u1]``.

    With ``k = floor(n u1)`` this is ``(1/u1)[(1/n) sum_{i<=k} X(i) + (u1 - k/n) X(k+1)]``.
    """
    if not 0.0 < u1 < 1.0:
        raise DomainError(f"level must lie in (0, 1), got {u1}")
    x = sub.values
    n = x.size
    k = int(math.floor(_snap(n * u1)))
    total = math.fsum(x[:k].tolist()) / n
    coef = u1 - k / n
    if coef > _ZERO_COEF and k < n:
        total += coef * float(x[k])
    return total / u1


def _component(sample: BivariateSample, d: Direction, split: float, cond: float) -> float:
    sub = tail_subsample(sample, d, cond)
    m_lower = estimate_lower_partial_mean(sub, split)
    mu = sub.mean()
    m_upper = (mu - split * m_lower) / (1.0 - split)
    if not m_upper > 0:
        raise DegenerateDenominatorError(f"estimated upper partial mean is {m_upper}")
    # for a constant subsample rounding can leave the ratio a hair above 1
    return max(0.0, 1.0 - m_lower / m_upper)


def estimate_vbzc(sample: BivariateSample, u) -> VbzcPoint:
    """Plug-in ``(I12, I21)``; ``mu`` is the subsample mean and ``M+ = (mu - u M-)/(1 - u)``."""
    u = as_point(u)
    i12 = _component(sample, Direction.D12, u.u1, u.u2)
    i21 = _component(sample, Direction.D21, u.u2, u.u1)
    return VbzcPoint(i12, i21, u)


def estimate_surface(
    sample: BivariateSample,
    u1_levels: Sequence[float],
    u2_levels: Sequence[float] | None = None,
) -> SurfaceGrid:
    """VBZC estimates on a lattice; cells whose estimate fails are ``nan`` (missing), never zero."""
    a = np.asarray(u1_levels, dtype=float)
    b = a.copy() if u2_levels is None else np.asarray(u2_levels, dtype=float)
    if np.any((a <= 0) | (a >= 1)) or np.any((b <= 0) | (b >= 1)):
        raise DomainError("estimation levels must lie strictly inside (0, 1)")
    v12 = np.full((a.size, b.size), np.nan)
    v21 = np.full((a.size, b.size), np.nan)
    failures: dict[str, int] = {}
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            for mat, d, split, cond in ((v12, Direction.D12, x, y), (v21, Direction.D21, y, x)):
                try:
                    mat[i, j] = _component(sample, d, float(split), float(cond))
                except ZengaError as exc:
                    failures[type(exc).__name__] = failures.get(type(exc).__name__, 0) + 1
    return SurfaceGrid(
        a, b, v12, Measure.VBZC, Provenance.EMPIRICAL, values2=v21, n=sample.n, meta={"failures": failures}
    )


def surface_slice(grid: SurfaceGrid, fix: str, at: float) -> SurfaceSlice:
    """A row (fixed ``u1``) or column (fixed ``u2``) of an estimated surface."""
    return grid.slice(fix, at)


__all__ = [
    "TailSubsample",
    "empirical_quantile",
    "estimate_lower_partial_mean",
    "estimate_surface",
    "estimate_vbzc",
    "surface_slice",
    "tail_subsample",
]
