"""Shared domain types, adaptive Gauss-Legendre quadrature and monotone inversion.

Every analytic routine in the package funnels its integrals through
:func:`integrate_1d` / :func:`integrate_2d` and its quantile inversions
through :func:`invert_monotone`, so accuracy and determinism are controlled
in one place.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConvergenceError, DomainError, UnboundedSupportError

EPS_CLIP = 1e-9

_GL_ORDER = 15
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_GL_ORDER)

_MAX_PANELS = 20_000
_MAX_EXPANSIONS = 200
_INVERT_XTOL = 1e-10
_C_UNDERFLOW = 1e-300
_C_DEEP_TAIL = 1e-30


def clip_level(u: float, eps: float = EPS_CLIP) -> tuple[float, bool]:
    """Clip a probability level into ``[eps, 1 - eps]``; report whether it moved."""
    u = float(u)
    if not math.isfinite(u):
        raise DomainError(f"probability level must be finite, got {u!r}")
    clipped = min(max(u, eps), 1.0 - eps)
    return clipped, clipped != u


@dataclass(frozen=True)
class QuantilePoint:
    """A pair of probability levels strictly inside (0, 1)."""

    u1: float
    u2: float
    clipped: bool = False

    def __post_init__(self):
        if not (0.0 < self.u1 < 1.0 and 0.0 < self.u2 < 1.0):
            raise DomainError(
                f"levels must lie in (0,1); use QuantilePoint.of() to clip ({self.u1}, {self.u2})"
            )

    @classmethod
    def of(cls, u1: float, u2: float, eps: float = EPS_CLIP) -> "QuantilePoint":
        c1, f1 = clip_level(u1, eps)
        c2, f2 = clip_level(u2, eps)
        return cls(c1, c2, f1 or f2)

    def swapped(self) -> "QuantilePoint":
        return QuantilePoint(self.u2, self.u1, self.clipped)

    def __iter__(self):
        yield self.u1
        yield self.u2


@dataclass(frozen=True)
class QuantileVector:
    """An n-vector of probability levels, clipped like :class:`QuantilePoint`."""

    levels: tuple[float, ...]
    clipped: bool = False

    def __post_init__(self):
        if len(self.levels) < 1:
            raise DomainError("a quantile vector needs at least one level")
        if not all(0.0 < u < 1.0 for u in self.levels):
            raise DomainError(f"levels must lie in (0,1): {self.levels}")

    @classmethod
    def of(cls, levels: Sequence[float], eps: float = EPS_CLIP) -> "QuantileVector":
        pairs = [clip_level(u, eps) for u in levels]
        return cls(tuple(p[0] for p in pairs), any(p[1] for p in pairs))

    def __len__(self) -> int:
        return len(self.levels)

    def __iter__(self):
        return iter(self.levels)


def as_point(u) -> QuantilePoint:
    """Coerce a ``QuantilePoint`` or a 2-sequence into a clipped ``QuantilePoint``."""
    if isinstance(u, QuantilePoint):
        return u
    u1, u2 = u
    return QuantilePoint.of(u1, u2)


def as_vector(u) -> QuantileVector:
    if isinstance(u, QuantileVector):
        return u
    if isinstance(u, QuantilePoint):
        return QuantileVector((u.u1, u.u2), u.clipped)
    if np.isscalar(u):
        return QuantileVector.of([u])
    return QuantileVector.of(list(u))


@dataclass(frozen=True)
class IntervalRect:
    """Axis-aligned integration rectangle ``[x_lo, x_hi] x [y_lo, y_hi]``."""

    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float

    def __post_init__(self):
        if not (self.x_lo < self.x_hi and self.y_lo < self.y_hi):
            raise DomainError(f"degenerate rectangle {self}")


@dataclass(frozen=True)
class Tolerance:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_depth: int = 30

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("tolerances must be positive")
        if self.max_depth < 1:
            raise DomainError("max_depth must be at least 1")


DEFAULT_TOL = Tolerance()


# --------------------------------------------------------------------------- quadrature


def _as_array_fn(f, vectorized: bool):
    if vectorized:
        return lambda x: np.asarray(f(x), dtype=float)
    return lambda x: np.array([f(float(xi)) for xi in x], dtype=float)


def _mapped(fv, a: float, b: float, scale: float):
    """Return ``(g, lo, hi)`` with ``int_a^b f = int_lo^hi g``; infinite ``b`` uses ``x = a + L s/(1-s)``."""
    if math.isinf(b):
        def g(s):
            w = 1.0 - s
            return scale * fv(a + scale * s / w) / (w * w)
        return g, 0.0, 1.0
    return fv, a, b


@dataclass(order=True)
class _Panel:
    neg_err: float
    seq: int
    a: float = field(compare=False)
    b: float = field(compare=False)
    depth: int = field(compare=False)
    coarse: float = field(compare=False)
    halves: tuple[float, float] = field(compare=False)

    @property
    def fine(self) -> float:
        return self.halves[0] + self.halves[1]


def _gl_sums(y: np.ndarray, widths: np.ndarray) -> np.ndarray:
    return 0.5 * widths * (y.reshape(len(widths), _GL_ORDER) @ _GL_WEIGHTS)


def _eval_panels(g, intervals: list[tuple[float, float]]) -> np.ndarray:
    lo = np.array([p[0] for p in intervals])
    hi = np.array([p[1] for p in intervals])
    x = (0.5 * (hi - lo))[:, None] * _GL_NODES[None, :] + (0.5 * (hi + lo))[:, None]
    y = g(x.ravel())
    if y.shape != x.ravel().shape:
        y = np.broadcast_to(y, x.ravel().shape)
    if not np.all(np.isfinite(y)):
        bad = x.ravel()[~np.isfinite(y)][0]
        raise DomainError(f"integrand is not finite at x={bad!r}")
    return _gl_sums(y, hi - lo)


def integrate_1d(
    f: Callable,
    a: float,
    b: float,
    tol: Tolerance = DEFAULT_TOL,
    *,
    vectorized: bool = False,
    scale: float | None = None,
) -> float:
    """Adaptive composite 15-point Gauss-Legendre quadrature of ``f`` over ``[a, b]``.

    Panels are bisected, largest error estimate first, until the summed
    estimate ``|GL(panel) - GL(left) - GL(right)|`` drops below
    ``max(abs_tol, rel_tol * |integral|)``.

    Parameters
    ----------
    f : callable
        Scalar integrand, or an array-in/array-out function when
        ``vectorized`` is true.
    a, b : float
        Limits with ``a < b``. ``b`` may be ``math.inf``.
    tol : Tolerance
    scale : float, optional
        Length scale ``L`` of the map ``x = a + L s/(1-s)`` used when ``b`` is
        infinite; it should match where the integrand's mass sits. Defaults
        to ``max(1, |a|)``.

    Raises
    ------
    DomainError
        ``f`` returned a non-finite value.
    ConvergenceError
        The panel depth or panel budget ran out; ``estimate`` holds the best value.
    """
    a = float(a)
    b = float(b)
    if not a < b or math.isnan(a) or math.isinf(a):
        raise DomainError(f"need finite a < b, got [{a}, {b}]")
    L = max(1.0, abs(a)) if scale is None else float(scale)
    if not L > 0:
        raise DomainError(f"scale must be positive, got {scale}")
    g, lo, hi = _mapped(_as_array_fn(f, vectorized), a, b, L)

    def split(lo_, hi_):
        m = 0.5 * (lo_ + hi_)
        return [(lo_, m), (m, hi_)]

    seq = 0
    first = _eval_panels(g, [(lo, hi)] + split(lo, hi))
    root = _Panel(-abs(first[0] - first[1] - first[2]), seq, lo, hi, 0, first[0], (first[1], first[2]))
    heap = [root]
    total = root.fine
    err = -root.neg_err

    while err > max(tol.abs_tol, tol.rel_tol * abs(total)):
        worst = heapq.heappop(heap)
        if worst.depth >= tol.max_depth or len(heap) > _MAX_PANELS:
            heapq.heappush(heap, worst)
            raise ConvergenceError(
                f"quadrature on [{a}, {b}] did not converge (error estimate {err:.3e})",
                estimate=_sum_panels(heap),
                error=err,
            )
        m = 0.5 * (worst.a + worst.b)
        vals = _eval_panels(g, split(worst.a, m) + split(m, worst.b))
        children = []
        for (ca, cb), coarse, h0, h1 in (
            ((worst.a, m), worst.halves[0], vals[0], vals[1]),
            ((m, worst.b), worst.halves[1], vals[2], vals[3]),
        ):
            seq += 1
            children.append(_Panel(-abs(coarse - h0 - h1), seq, ca, cb, worst.depth + 1, coarse, (h0, h1)))
        for c in children:
            heapq.heappush(heap, c)
        total = _sum_panels(heap)
        err = math.fsum(-p.neg_err for p in heap)
    return total


def _sum_panels(panels: list[_Panel]) -> float:
    ordered = sorted(panels, key=lambda p: p.a)
    return math.fsum(v for p in ordered for v in p.halves)


def integrate_2d(
    f: Callable,
    rect: IntervalRect,
    tol: Tolerance = DEFAULT_TOL,
    *,
    vectorized: bool = False,
) -> float:
    """Iterated adaptive quadrature of ``f(x, y)`` over ``rect``.

    The outer integral runs over ``x``; each outer node triggers an inner
    :func:`integrate_1d` over ``y``. With ``vectorized`` true, ``f`` is called
    with a scalar ``x`` and an array ``y``. Infinite upper limits are passed
    through to :func:`integrate_1d`.
    """
    def inner(x: float) -> float:
        return integrate_1d(
            lambda y: f(x, y), rect.y_lo, rect.y_hi, tol, vectorized=vectorized
        )

    return integrate_1d(inner, rect.x_lo, rect.x_hi, tol)


def integrate_nd(
    f: Callable,
    bounds: Sequence[tuple[float, float]],
    tol: Tolerance = DEFAULT_TOL,
) -> float:
    """Nested quadrature over a box; ``f`` takes ``len(bounds)`` arguments.

    The innermost axis is integrated vectorized, so ``f`` must accept an
    array in its last argument.
    """
    lo, hi = bounds[0]
    if len(bounds) == 1:
        return integrate_1d(f, lo, hi, tol, vectorized=True)

    def outer(x: float) -> float:
        return integrate_nd(lambda *rest: f(x, *rest), bounds[1:], tol)

    return integrate_1d(outer, lo, hi, tol)


def integrate_levels(
    f: Callable,
    lo: float,
    hi: float,
    tol: Tolerance = DEFAULT_TOL,
    *,
    vectorized: bool = False,
) -> float:
    """Integrate ``f(p, c)`` over a probability interval ``lo <= p <= hi``, where ``c = 1 - p``.

    The integral is taken in ``s = log((1 - lo) / (1 - p))``, so ``c`` is
    produced directly as ``(1 - lo) e^-s`` and never suffers the rounding of
    ``1 - p`` near 1. Quantile functions with an integrable pole at ``p = 1``
    become exponentially decaying in ``s``; ``hi = 1`` maps to ``s = inf``.
    Points where ``c`` underflows to zero contribute nothing.
    """
    lo = float(lo)
    hi = float(hi)
    if not 0.0 <= lo < hi <= 1.0:
        raise DomainError(f"need 0 <= lo < hi <= 1, got [{lo}, {hi}]")
    clo = 1.0 - lo
    s_max = math.inf if hi == 1.0 else -math.log1p(-(hi - lo) / clo)

    def g(s):
        s = np.asarray(s, dtype=float)
        c = clo * np.exp(-s)
        p = lo + clo * -np.expm1(-s)
        alive = c > _C_UNDERFLOW
        if s.ndim == 0:
            if not alive:
                return 0.0
            with np.errstate(over="ignore", invalid="ignore"):
                v = float(f(float(p), float(c))) * float(c)
            return v if math.isfinite(v) or c > _C_DEEP_TAIL else 0.0
        out = np.zeros_like(s)
        if np.any(alive):
            with np.errstate(over="ignore", invalid="ignore"):
                out[alive] = np.asarray(f(p[alive], c[alive]), dtype=float) * c[alive]
        # an integrable pole times c is tiny this deep; overflow there is an artefact
        out[~np.isfinite(out) & (c <= _C_DEEP_TAIL)] = 0.0
        return out

    if vectorized:
        return integrate_1d(g, 0.0, s_max, tol, vectorized=True)
    return integrate_1d(lambda s: g(s), 0.0, s_max, tol)


def integrate_levels_nd(
    f: Callable,
    bounds: Sequence[tuple[float, float]],
    tol: Tolerance = DEFAULT_TOL,
) -> float:
    """Nested :func:`integrate_levels` over a box of probability levels.

    ``f(ps, cs)`` receives tuples of levels and complements; the last entry of
    each is an array (the innermost axis is vectorized).
    """
    def nest(k: int, ps: tuple, cs: tuple) -> float:
        lo, hi = bounds[k]
        if k == len(bounds) - 1:
            return integrate_levels(lambda p, c: f(ps + (p,), cs + (c,)), lo, hi, tol, vectorized=True)
        return integrate_levels(lambda p, c: nest(k + 1, ps + (float(p),), cs + (float(c),)), lo, hi, tol)

    return nest(0, (), ())


# --------------------------------------------------------------------------- inversion


def invert_monotone(
    g: Callable,
    target,
    bracket_hint: float = 1.0,
    *,
    lower: float = 0.0,
    xtol: float = _INVERT_XTOL,
):
    """Smallest ``x >= lower`` with ``g(x) >= target``, for non-decreasing ``g``.

    The upper bracket grows geometrically from ``bracket_hint``; bisection
    then shrinks ``[lo, hi]`` (``g(lo) < target <= g(hi)``) to ``xtol`` or to
    floating resolution. ``target`` may be an array, in which case ``g`` must
    be vectorized and the result is an array of the same shape.

    Raises
    ------
    UnboundedSupportError
        ``g`` stays below ``target`` after 200 doublings of the bracket.
    """
    scalar = np.isscalar(target)
    t = np.atleast_1d(np.asarray(target, dtype=float))
    call = (lambda x: np.array([float(g(float(x[0])))])) if scalar else (lambda x: np.asarray(g(x), dtype=float))

    lower = float(lower)
    at_lower = call(np.full_like(t, lower)) >= t
    hint = float(bracket_hint)
    step = hint - lower if hint > lower else 1.0

    lo = np.full_like(t, lower)
    hi = np.full_like(t, lower + step)
    need = ~at_lower & (call(hi) < t)
    n = 0
    while np.any(need):
        n += 1
        if n > _MAX_EXPANSIONS:
            raise UnboundedSupportError(
                f"could not bracket target {t[need][0]!r} after {_MAX_EXPANSIONS} expansions"
            )
        lo = np.where(need, hi, lo)
        step *= 2.0
        hi = np.where(need, lower + step, hi)
        need = need & (call(hi) < t)

    active = ~at_lower
    for _ in range(2000):
        width_ok = (hi - lo) <= np.maximum(xtol, 4.0 * np.finfo(float).eps * np.abs(hi))
        active = active & ~width_ok
        if not np.any(active):
            break
        mid = 0.5 * (lo + hi)
        stuck = (mid <= lo) | (mid >= hi)
        active = active & ~stuck
        ge = call(mid) >= t
        hi = np.where(active & ge, mid, hi)
        lo = np.where(active & ~ge, mid, lo)

    out = np.where(at_lower, lower, hi)
    return float(out[0]) if scalar else out.reshape(np.shape(target))
