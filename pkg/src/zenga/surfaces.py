"""Moment-based surface Z, quantile-based surface I, and their companions.

Z compares the product of quantiles with the product of first-moment
(size-biased) quantiles; I compares lower and upper partial means of the
product quantile ``Q1(p1) Q21(p1, p2)``. Both lie in [0, 1] and vanish under
perfect equality.

Level integrals go through :func:`numerics.integrate_levels`, which works with
the complement ``1 - p`` directly so heavy upper tails stay accurate.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    CapabilityError,
    ConditioningError,
    CostWarning,
    DegenerateDenominatorError,
    DomainError,
)
from .grid import Measure, Provenance, SurfaceGrid
from .models import BivariateQuantileModel, ProductQuantileModel, UnivariateModel
from .numerics import (
    DEFAULT_TOL,
    EPS_CLIP,
    IntervalRect,
    QuantileVector,
    Tolerance,
    as_point,
    as_vector,
    integrate_1d,
    integrate_2d,
    integrate_levels,
    integrate_levels_nd,
    invert_monotone,
)

log = logging.getLogger(__name__)

#: looser default for the index integrals; their integrands carry inversion noise near 1e-10
INDEX_TOL = Tolerance(abs_tol=1e-7, rel_tol=1e-6, max_depth=30)

_METHODS_I = ("auto", "analytic", "quadrature")
_METHODS_Z = ("auto", "quantiles", "cdf", "density")


@dataclass(frozen=True)
class PartialMeans:
    """Lower and upper partial product means at one point."""

    lower: float
    upper: float
    provenance: Provenance = Provenance.QUADRATURE

    def __post_init__(self):
        if self.lower < 0 or self.upper < 0:
            raise DomainError(f"partial means must be non-negative, got ({self.lower}, {self.upper})")


# --------------------------------------------------------------------------- product-quantile boxes


def _use_analytic(model, method: str) -> bool:
    if method not in _METHODS_I:
        raise DomainError(f"method must be one of {_METHODS_I}, got {method!r}")
    has = getattr(model, "supports", lambda _: False)("partial_means")
    if method == "analytic" and not has:
        raise CapabilityError(f"{type(model).__name__} has no closed-form partial means")
    return has and method != "quadrature"


def _box(model: BivariateQuantileModel, lo1, hi1, lo2, hi2, tol: Tolerance, analytic: bool) -> float:
    """Integral of the product quantile over ``[lo1, hi1] x [lo2, hi2]``."""
    if hi1 <= lo1 or hi2 <= lo2:
        return 0.0
    if analytic:
        return model.quantile_box(lo1, hi1, lo2, hi2)
    return integrate_levels_nd(
        lambda ps, cs: model.quantile_product(ps[0], ps[1], cs[0], cs[1]),
        [(lo1, hi1), (lo2, hi2)],
        tol,
    )


def _product_quantile_mean(model, tol: Tolerance, analytic: bool) -> float:
    m = model.quantile_product_mean()
    if m is not None:
        return float(m)
    return _box(model, 0.0, 1.0, 0.0, 1.0, tol, analytic)


def partial_product_means(model, u, tol: Tolerance = DEFAULT_TOL, *, method: str = "auto") -> PartialMeans:
    """``M-`` over ``[0, u1] x [0, u2]`` and ``M+`` over ``[u1, 1] x [u2, 1]``, each normalised by its area."""
    u = as_point(u)
    analytic = _use_analytic(model, method)
    lower = _box(model, 0.0, u.u1, 0.0, u.u2, tol, analytic) / (u.u1 * u.u2)
    upper = _box(model, u.u1, 1.0, u.u2, 1.0, tol, analytic) / ((1.0 - u.u1) * (1.0 - u.u2))
    prov = Provenance.ANALYTIC if analytic else Provenance.QUADRATURE
    return PartialMeans(max(float(lower), 0.0), max(float(upper), 0.0), prov)


def _ratio_measure(lower_area_weighted: float, upper_area_weighted: float, what: str) -> float:
    if not upper_area_weighted > 0:
        raise DegenerateDenominatorError(f"upper partial mean is zero ({what})")
    return 1.0 - lower_area_weighted / upper_area_weighted


# --------------------------------------------------------------------------- I


def zenga_I(model, u, tol: Tolerance = DEFAULT_TOL, *, method: str = "auto") -> float:
    """Quantile-based Zenga measure ``1 - M-/M+``.

    ``model`` may be bivariate, a :class:`UnivariateModel` (one level), or a
    :class:`ProductQuantileModel` of any dimension. Four or more dimensions
    work but trigger a :class:`CostWarning`.
    """
    if isinstance(model, UnivariateModel):
        v = as_vector(u)
        if len(v) != 1:
            raise DomainError("a univariate model takes exactly one level")
        return _univariate_I(model.quantile, v.levels[0], tol)
    if isinstance(model, ProductQuantileModel):
        return _multivariate_I(model, as_vector(u), tol)
    v = as_vector(u)
    if len(v) != 2:
        raise DomainError(f"a bivariate model takes two levels, got {len(v)}")
    pm = partial_product_means(model, v.levels, tol, method=method)
    return _ratio_measure(pm.lower, pm.upper, "I")


def _univariate_I(q: Callable, u: float, tol: Tolerance) -> float:
    lower = integrate_levels(lambda p, c: q(p), 0.0, u, tol, vectorized=True)
    upper = integrate_levels(lambda p, c: q(p), u, 1.0, tol, vectorized=True)
    return _ratio_measure((1.0 - u) * lower, u * upper, "univariate I")


def _multivariate_I(model: ProductQuantileModel, v: QuantileVector, tol: Tolerance) -> float:
    n = len(v)
    if n != model.dim:
        raise DomainError(f"model has dimension {model.dim}, got {n} levels")
    if n >= 4:
        warnings.warn(f"nested quadrature in {n} dimensions is very slow", CostWarning, stacklevel=3)
    f = lambda ps, cs: model.quantile_product(*ps)  # noqa: E731
    lower = integrate_levels_nd(f, [(0.0, x) for x in v.levels], tol)
    upper = integrate_levels_nd(f, [(x, 1.0) for x in v.levels], tol)
    lo_w = math.prod(1.0 - x for x in v.levels) * lower
    up_w = math.prod(v.levels) * upper
    return _ratio_measure(lo_w, up_w, "multivariate I")


def _I_row(model, u1: float, u2: np.ndarray, tol: Tolerance, analytic: bool) -> np.ndarray:
    """I at ``(u1, u2[j])``; vectorized when closed forms are available."""
    if analytic:
        lower = np.array([model.quantile_box(0.0, u1, 0.0, b) for b in u2])
        upper = np.array([model.quantile_box(u1, 1.0, b, 1.0) for b in u2])
        lo_w = (1.0 - u1) * (1.0 - u2) * lower
        up_w = u1 * u2 * upper
        if np.any(up_w <= 0):
            raise DegenerateDenominatorError("upper partial mean is zero (I)")
        return 1.0 - lo_w / up_w
    return np.array([zenga_I(model, (u1, b), tol, method="quadrature") for b in u2])


# --------------------------------------------------------------------------- Lorenz bridge


def lorenz_surface(model, u, tol: Tolerance = DEFAULT_TOL, *, method: str = "auto") -> float:
    """``L(u1, u2)``: the share of the product-quantile mass over ``[0, u1] x [0, u2]``.

    Levels may sit on the closed square; ``L(1, 1) = 1`` and ``L = 0`` on the axes.
    """
    u1, u2 = (float(x) for x in u)
    if not (0.0 <= u1 <= 1.0 and 0.0 <= u2 <= 1.0):
        raise DomainError(f"Lorenz levels must lie in [0, 1], got ({u1}, {u2})")
    analytic = _use_analytic(model, method)
    total = _product_quantile_mean(model, tol, analytic)
    if not total > 0:
        raise DegenerateDenominatorError("product-quantile mean is zero")
    if u1 == 0.0 or u2 == 0.0:
        return 0.0
    return _box(model, 0.0, u1, 0.0, u2, tol, analytic) / total


def zenga_I_from_lorenz(L_uu: float, L_1u: float, L_u1: float, u) -> float:
    """I from the Lorenz surface: ``L_uu = L(u1, u2)``, ``L_1u = L(1, u2)``, ``L_u1 = L(u1, 1)``."""
    u = as_point(u)
    bracket = 1.0 - L_1u - L_u1 + L_uu
    if not bracket > 0:
        raise DegenerateDenominatorError(f"upper Lorenz mass is {bracket} at {tuple(u)}")
    return 1.0 - (1.0 - u.u1) * (1.0 - u.u2) * L_uu / (u.u1 * u.u2 * bracket)


# --------------------------------------------------------------------------- Z


def _fm_marginal_quantile(model, u1: float, c1: float) -> float:
    lower = model.support_lower[0]
    if hasattr(model, "fm_tail1"):
        return invert_monotone(lambda x: -np.asarray(model.fm_tail1(x)), -c1, lower=lower)
    return invert_monotone(model.fm_marginal1, u1, lower=lower)


def _fm_conditional_quantiles(model, t1: float, u2: np.ndarray) -> np.ndarray:
    lower = model.support_lower[1]
    if hasattr(model, "fm_upper_survival21"):
        g = lambda x: -np.asarray(model.fm_upper_survival21(t1, x))  # noqa: E731
        return invert_monotone(g, -(1.0 - u2), lower=lower)
    return invert_monotone(lambda x: np.asarray(model.fm_upper_conditional21(t1, x)), u2, lower=lower)


class _DensityFirstMoment:
    """First-moment marginal and upper-conditional distributions built from a density."""

    def __init__(self, model, tol: Tolerance):
        self.model = model
        self.tol = tol
        # the inner integral feeds the outer one; keep its noise well below the outer tolerance
        self.inner_tol = Tolerance(tol.abs_tol * 1e-3, tol.rel_tol * 1e-3, tol.max_depth)
        self.mu = float(model.product_mean())
        self.lo = model.support_lower
        self.hi = model.support_upper

    def _weighted_col(self, t1: float, x2_lo: float) -> float:
        # t1 * int_{x2_lo}^{hi2} t2 f(t1, t2) dt2
        f = self.model.density
        inner = integrate_1d(
            lambda t2: t2 * f(t1, t2), x2_lo, self.hi[1], self.inner_tol, vectorized=True, scale=1.0 + abs(t1) + abs(x2_lo)
        )
        return t1 * inner

    def upper_mass(self, t1: float, x2: float | None = None) -> float:
        """``P1(X1 > t1, X2 > x2)`` under the first-moment law."""
        x2_lo = self.lo[1] if x2 is None else max(x2, self.lo[1])
        if t1 >= self.hi[0] or x2_lo >= self.hi[1]:
            return 0.0
        start = max(t1, self.lo[0])
        return integrate_1d(lambda t: self._weighted_col(t, x2_lo), start, self.hi[0], self.tol) / self.mu

    def q1(self, c1: float) -> float:
        return invert_monotone(lambda x: -self.upper_mass(x), -c1, lower=self.lo[0])

    def q21(self, t1: float, c2: float) -> float:
        tail = self.upper_mass(t1)
        if not tail > 0:
            raise ConditioningError(f"first-moment mass above {t1} is zero")
        return invert_monotone(lambda x: -self.upper_mass(t1, x) / tail, -c2, lower=self.lo[1])


def _z_method(model, method: str) -> str:
    if method not in _METHODS_Z:
        raise DomainError(f"method must be one of {_METHODS_Z}, got {method!r}")
    caps = model.capabilities
    if method != "auto":
        need = {"quantiles": {"fm_quantiles"}, "cdf": {"fm_cdfs"}, "density": {"density", "product_mean"}}[method]
        if not need <= caps:
            raise CapabilityError(f"{type(model).__name__} lacks {sorted(need - caps)} for method {method!r}")
        return method
    if "fm_quantiles" in caps and model.fm_quantiles_exact:
        return "quantiles"
    if "fm_cdfs" in caps:
        return "cdf"
    if {"density", "product_mean"} <= caps:
        return "density"
    if "fm_quantiles" in caps:
        return "quantiles"
    raise CapabilityError(
        f"{type(model).__name__} provides neither first-moment quantiles nor a density with its product moment"
    )


def _Z_row(model, u1: float, u2: np.ndarray, tol: Tolerance, method: str) -> np.ndarray:
    """Z at ``(u1, u2[j])``, sharing the first-moment marginal quantile across the row."""
    how = _z_method(model, method)
    u2 = np.asarray(u2, dtype=float)
    c1 = 1.0 - u1
    q = np.asarray(model.q1(u1, c1)) * np.asarray(model.q21(u1, u2, c1, 1.0 - u2))
    if how == "quantiles":
        qq = np.array([np.prod(model.fm_quantiles(u1, b)) for b in u2])
    elif how == "cdf":
        t1 = _fm_marginal_quantile(model, u1, c1)
        qq = t1 * np.asarray(_fm_conditional_quantiles(model, t1, u2))
    else:
        fm = _DensityFirstMoment(model, tol)
        t1 = fm.q1(c1)
        qq = np.array([t1 * fm.q21(t1, 1.0 - b) for b in u2])
    if np.any(qq <= 0):
        raise DegenerateDenominatorError("first-moment quantile product is zero")
    return 1.0 - q / qq


def zenga_Z(model, u, tol: Tolerance = DEFAULT_TOL, *, method: str = "auto") -> float:
    """Moment-based Zenga surface ``1 - Q1 Q21 / (Q1^(1) Q21^(1))``.

    The first-moment quantiles come from, in order of preference under
    ``method="auto"``: exact closed forms, closed-form first-moment CDFs
    (inverted numerically), or the density and product moment (first-moment
    CDFs by quadrature, then inverted). Approximate closed forms (the Pareto
    high-level asymptotics) are only used when requested with
    ``method="quantiles"`` or when nothing else is available.

    The first-moment conditional quantile conditions on
    ``X1 > Q1^(1)(u1)`` under the first-moment law, mirroring ``Q21``.

    A :class:`UnivariateModel` with ``fm_quantile`` gives the Zenga curve
    ``1 - Q(u)/Q^(1)(u)``.
    """
    if isinstance(model, UnivariateModel):
        v = as_vector(u)
        if len(v) != 1:
            raise DomainError("a univariate model takes exactly one level")
        if model.fm_quantile is None:
            raise CapabilityError("the univariate model has no first-moment quantile")
        x = v.levels[0]
        return 1.0 - float(model.quantile(x)) / float(model.fm_quantile(x))
    if isinstance(model, ProductQuantileModel):
        raise CapabilityError("a product-quantile model carries no first-moment information")
    p = as_point(u)
    return float(_Z_row(model, p.u1, np.array([p.u2]), tol, method)[0])


# --------------------------------------------------------------------------- indices


def _index(row: Callable, tol: Tolerance, eps: float) -> float:
    rect = IntervalRect(eps, 1.0 - eps, eps, 1.0 - eps)
    value = integrate_2d(row, rect, tol, vectorized=True)
    # the integrand is bounded by 1, so the clipped frame holds at most 4 eps of mass
    log.debug("index integral %.12g; clipped frame contributes at most %.1e", value, 4 * eps)
    return value


def zenga_index_xi(model, tol: Tolerance = INDEX_TOL, *, method: str = "auto", eps: float = EPS_CLIP) -> float:
    """``xi``: the integral of Z over the unit square (clipped to ``[eps, 1 - eps]^2``)."""
    _z_method(model, method)
    return _index(lambda a, b: _Z_row(model, a, b, DEFAULT_TOL, method), tol, eps)


def synthetic_index_I(model, tol: Tolerance = INDEX_TOL, *, method: str = "auto", eps: float = EPS_CLIP) -> float:
    """The synthetic index: the integral of I over the unit square (clipped)."""
    analytic = _use_analytic(model, method)
    return _index(lambda a, b: _I_row(model, a, b, DEFAULT_TOL, analytic), tol, eps)


# --------------------------------------------------------------------------- x-space measure


def zenga_A_xspace(model, x1: float, x2: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """``A(x1, x2) = 1 - mu-/mu+``: mean of ``X1 X2`` on the lower orthant over its mean on the upper one.

    Both conditional product moments and both orthant masses are computed by
    quadrature of the density over the model's support box.
    """
    caps = model.capabilities
    if "atom" in caps:
        a1, a2 = model.atom
        lower_mass = 1.0 if (a1 <= x1 and a2 <= x2) else 0.0
        upper_mass = 1.0 if (a1 > x1 and a2 > x2) else 0.0
        if lower_mass == 0.0 or upper_mass == 0.0:
            raise ConditioningError(f"a point mass leaves one orthant at ({x1}, {x2}) empty")
    if "density" not in caps:
        raise CapabilityError(f"{type(model).__name__} has no density")
    if not model.finite_product_moment:
        raise DomainError(f"{type(model).__name__} has an infinite product moment; A is undefined")
    (lo1, lo2), (hi1, hi2) = model.support_lower, model.support_upper
    f = model.density

    def mass_and_moment(a1, b1, a2, b2):
        if not (a1 < b1 and a2 < b2):
            return 0.0, 0.0
        rect = IntervalRect(a1, b1, a2, b2)
        mass = integrate_2d(lambda s, t: f(s, t), rect, tol, vectorized=True)
        moment = integrate_2d(lambda s, t: s * t * f(s, t), rect, tol, vectorized=True)
        return mass, moment

    f_lo, m_lo = mass_and_moment(lo1, min(x1, hi1), lo2, min(x2, hi2))
    f_hi, m_hi = mass_and_moment(max(x1, lo1), hi1, max(x2, lo2), hi2)
    if not (f_lo > 0 and f_hi > 0):
        raise ConditioningError(f"an orthant at ({x1}, {x2}) has zero probability (masses {f_lo}, {f_hi})")
    mu_lo = m_lo / f_lo
    mu_hi = m_hi / f_hi
    if not mu_hi > 0:
        raise DegenerateDenominatorError("upper conditional product moment is zero")
    return float(1.0 - mu_lo / mu_hi)


# --------------------------------------------------------------------------- diagnostics and grids


@dataclass(frozen=True)
class MonotonicityReport:
    """Outcome of the product-quantile monotonicity check.

    ``violations`` lists ``(coordinate, i, j)``: the product quantile drops
    between lattice index ``i`` and ``i + 1`` along ``coordinate`` (1 or 2)
    at fixed index ``j`` of the other coordinate.
    """

    passed: bool
    violations: list[tuple[int, int, int]] = field(default_factory=list)

    def coordinates(self) -> set[int]:
        return {v[0] for v in self.violations}


def monotonicity_diagnostic(model, u1_levels, u2_levels=None, *, rel_slack: float = 1e-12) -> MonotonicityReport:
    """Check that ``Q1(p1) Q21(p1, p2)`` is non-decreasing in each level on a lattice.

    ``u1_levels`` may also be a :class:`SurfaceGrid`, whose lattice is used.
    """
    if isinstance(u1_levels, SurfaceGrid):
        u1_levels, u2_levels = u1_levels.u1_levels, u1_levels.u2_levels
    a = np.asarray(u1_levels, dtype=float)
    b = a if u2_levels is None else np.asarray(u2_levels, dtype=float)
    prod = np.asarray(model.quantile_product(a[:, None], b[None, :]), dtype=float)
    prod = np.broadcast_to(prod, (a.size, b.size))
    violations: list[tuple[int, int, int]] = []
    for coord, axis in ((1, 0), (2, 1)):
        d = np.diff(prod, axis=axis)
        ref = np.maximum(np.abs(prod[:-1, :] if axis == 0 else prod[:, :-1]), 1.0)
        bad = np.argwhere(d < -rel_slack * ref)
        for i, j in bad:
            violations.append((coord, int(i), int(j)) if axis == 0 else (coord, int(j), int(i)))
    return MonotonicityReport(not violations, violations)


def evaluate_surface(
    model,
    measure: Measure | str,
    u1_levels: Sequence[float],
    u2_levels: Sequence[float] | None = None,
    tol: Tolerance = DEFAULT_TOL,
    *,
    method: str = "auto",
) -> SurfaceGrid:
    """Evaluate a measure on a lattice and wrap it as a :class:`SurfaceGrid`."""
    measure = Measure(measure)
    a = np.asarray(u1_levels, dtype=float)
    b = a.copy() if u2_levels is None else np.asarray(u2_levels, dtype=float)
    meta = {"model": repr(model)}
    if measure is Measure.Z:
        vals = np.vstack([_Z_row(model, x, b, tol, method) for x in a])
        how = _z_method(model, method)
        prov = Provenance.ANALYTIC if how == "quantiles" else Provenance.QUADRATURE
        meta["path"] = how
        return SurfaceGrid(a, b, vals, measure, prov, meta=meta)
    if measure is Measure.I:
        analytic = _use_analytic(model, method)
        vals = np.vstack([_I_row(model, x, b, tol, analytic) for x in a])
        prov = Provenance.ANALYTIC if analytic else Provenance.QUADRATURE
        return SurfaceGrid(a, b, vals, measure, prov, meta=meta)
    if measure is Measure.L:
        analytic = _use_analytic(model, method)
        m = "analytic" if analytic else "quadrature"
        vals = np.array([[lorenz_surface(model, (x, y), tol, method=m) for y in b] for x in a])
        prov = Provenance.ANALYTIC if analytic else Provenance.QUADRATURE
        return SurfaceGrid(a, b, vals, measure, prov, meta=meta)
    from .vbzc import vbzc_components

    pts = [[vbzc_components(model, (x, y), tol) for y in b] for x in a]
    v12 = np.array([[p.i12 for p in row] for row in pts])
    v21 = np.array([[p.i21 for p in row] for row in pts])
    if measure is Measure.I12:
        return SurfaceGrid(a, b, v12, measure, Provenance.QUADRATURE, meta=meta)
    if measure is Measure.I21:
        return SurfaceGrid(a, b, v21, measure, Provenance.QUADRATURE, meta=meta)
    return SurfaceGrid(a, b, v12, measure, Provenance.QUADRATURE, values2=v21, meta=meta)


__all__ = [
    "INDEX_TOL",
    "MonotonicityReport",
    "PartialMeans",
    "evaluate_surface",
    "lorenz_surface",
    "monotonicity_diagnostic",
    "partial_product_means",
    "synthetic_index_I",
    "zenga_A_xspace",
    "zenga_I",
    "zenga_I_from_lorenz",
    "zenga_Z",
    "zenga_index_xi",
]
