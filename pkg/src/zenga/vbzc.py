"""The vector-valued bivariate Zenga curve ``(I12, I21)``.

``I12`` compares the lower and upper partial means of ``X1`` given
``X2 > Q2(u2)``, split at the conditional ``u1``-quantile; ``I21`` swaps the
roles. Each component is determined by the integral ``J`` of the conditional
quantile, which also makes the curve invertible (see
:func:`reconstruct_conditional_quantile`).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import CapabilityError, ConditioningError, DegenerateDenominatorError, DomainError, InversionError
from .numerics import DEFAULT_TOL, QuantilePoint, Tolerance, as_point, integrate_1d, integrate_levels, invert_monotone


class Direction(str, enum.Enum):
    D12 = "12"
    D21 = "21"


@dataclass(frozen=True)
class DirectionalPartials:
    """``J``, the conditional mean ``mu`` and the partial means ``M-``, ``M+`` for one direction."""

    direction: Direction
    j: float
    mu: float
    m_lower: float
    m_upper: float

    @property
    def zenga(self) -> float:
        if not self.m_upper > 0:
            raise DegenerateDenominatorError(f"upper partial mean is zero (direction {self.direction.value})")
        return 1.0 - self.m_lower / self.m_upper


@dataclass(frozen=True)
class VbzcPoint:
    i12: float
    i21: float
    at: QuantilePoint

    def __iter__(self):
        yield self.i12
        yield self.i21


# --------------------------------------------------------------------------- density fallback


class _DensityConditional:
    """Conditional law of ``X1`` given ``X2 > t`` for a model known through its density.

    ``J`` is the truncated conditional mean ``E[X1; X1 <= Q12(u1) | X2 > t]``,
    which equals the integral of the conditional quantile up to ``u1`` and needs
    a single inversion.
    """

    def __init__(self, model, tol: Tolerance, swap: bool):
        self.tol = tol
        lo, hi = model.support_lower, model.support_upper
        if swap:
            self.f = lambda a, b: model.density(b, a)
            lo, hi = lo[::-1], hi[::-1]
        else:
            self.f = model.density
        self.lo, self.hi = lo, hi

    def _col(self, x1: float, t: float, weight: bool) -> float:
        t = max(t, self.lo[1])
        if t >= self.hi[1]:
            return 0.0
        v = integrate_1d(lambda b: self.f(x1, b), t, self.hi[1], self.tol, vectorized=True, scale=1.0 + abs(t) + abs(x1))
        return x1 * v if weight else v

    def _mass(self, t: float, upto: float, weight: bool) -> float:
        a, b = self.lo[0], min(upto, self.hi[0])
        if not a < b:
            return 0.0
        return integrate_1d(lambda x: self._col(x, t, weight), a, b, self.tol)

    def conditioning_level(self, u2: float) -> float:
        total = self._mass(self.lo[1], math.inf, False)
        return invert_monotone(lambda t: -self._mass(t, math.inf, False) / total, -(1.0 - u2), lower=self.lo[1])

    def partials(self, u1: float, u2: float) -> tuple[float, float]:
        t = self.conditioning_level(u2)
        tail = self._mass(t, math.inf, False)
        if not tail > 0:
            raise ConditioningError(f"no probability mass above the {u2}-quantile")
        x_star = invert_monotone(lambda x: self._mass(t, x, False) / tail, u1, lower=self.lo[0])
        j = self._mass(t, x_star, True) / tail
        upper = integrate_1d(lambda x: self._col(x, t, True), x_star, self.hi[0], self.tol) / tail if x_star < self.hi[0] else 0.0
        return j, upper


# --------------------------------------------------------------------------- partials and components


def directional_partials(model, direction, u, tol: Tolerance = DEFAULT_TOL) -> DirectionalPartials:
    """Integrals of one conditional quantile: ``J`` below the split level and the conditional mean.

    For direction ``12`` the integrand is ``Q12(p, u2)`` over ``p``, split at
    ``u1``; for ``21`` it is ``Q21(u1, p)`` split at ``u2``. The part above the
    split is integrated directly and ``mu = J + upper``, so ``M+`` carries no
    cancellation.
    """
    d = direction if isinstance(direction, Direction) else Direction(str(direction))
    u = as_point(u)
    split, fixed = (u.u1, u.u2) if d is Direction.D12 else (u.u2, u.u1)
    if not getattr(model, "finite_conditional_means", True):
        raise DomainError(f"{type(model).__name__} has infinite conditional means")
    cap = "q12" if d is Direction.D12 else "q21"
    if model.supports(cap):
        cf = 1.0 - fixed
        if d is Direction.D12:
            q = lambda p, c: model.q12(p, fixed, c, cf)  # noqa: E731
        else:
            q = lambda p, c: model.q21(fixed, p, cf, c)  # noqa: E731
        j = integrate_levels(q, 0.0, split, tol, vectorized=True)
        upper = integrate_levels(q, split, 1.0, tol, vectorized=True)
    elif model.supports("density"):
        j, upper = _DensityConditional(model, tol, swap=d is Direction.D21).partials(split, fixed)
    else:
        raise CapabilityError(f"{type(model).__name__} provides neither {cap} nor a density")
    j = float(j)
    upper = float(upper)
    return DirectionalPartials(d, j, j + upper, j / split, upper / (1.0 - split))


def vbzc_components(model, u, tol: Tolerance = DEFAULT_TOL) -> VbzcPoint:
    """``(I12, I21)`` at ``u`` from the definitional integrals."""
    u = as_point(u)
    i12 = directional_partials(model, Direction.D12, u, tol).zenga
    i21 = directional_partials(model, Direction.D21, u, tol).zenga
    return VbzcPoint(i12, i21, u)


def pareto_vbzc_printed(c: float, u) -> tuple[float, float]:
    """The closed-form VBZC for the unit-scale Pareto exactly as printed.

    Kept only as a cross-check: it exceeds 1 at interior points and equals
    ``2 - I`` of the definitional value (see :func:`printed_discrepancy`).
    Nothing else in the package calls it.
    """
    if not c > 0:
        raise DomainError(f"shape c must be positive, got {c}")
    u = as_point(u)

    def one(a: float, b: float) -> float:
        sa = (1.0 - a) ** (1.0 / c)
        sb = (1.0 - b) ** (1.0 / c)
        num = (1.0 - a) * (sa * ((c - 1.0) * sb * a + (1.0 - c) * a + c) + c * a - c)
        den = a * (((c - 1.0) * sb - c + 1.0) * sa + c) * (a - 1.0)
        return 1.0 - num / den

    return one(u.u1, u.u2), one(u.u2, u.u1)


@dataclass(frozen=True)
class PrintedDiscrepancy:
    c: float
    at: QuantilePoint
    printed: tuple[float, float]
    definitional: tuple[float, float]

    @property
    def sum_residual(self) -> tuple[float, float]:
        """``printed + definitional - 2``; zero when the printed value is the reflection ``2 - I``."""
        return tuple(p + d - 2.0 for p, d in zip(self.printed, self.definitional))

    @property
    def printed_out_of_bounds(self) -> bool:
        return any(not 0.0 <= v <= 1.0 for v in self.printed)

    def report(self) -> str:
        p12, p21 = self.printed
        d12, d21 = self.definitional
        r12, r21 = self.sum_residual
        lines = [
            f"unit-scale Pareto c={self.c:g} at u=({self.at.u1:g}, {self.at.u2:g})",
            f"  printed closed form : I12={p12:.6f}  I21={p21:.6f}",
            f"  definitional        : I12={d12:.6f}  I21={d21:.6f}",
            f"  printed + definitional - 2 : {r12:.2e}, {r21:.2e}",
            "  printed value leaves [0, 1]" if self.printed_out_of_bounds else "  printed value inside [0, 1]",
        ]
        return "\n".join(lines)


def printed_discrepancy(c: float, u, tol: Tolerance = DEFAULT_TOL) -> PrintedDiscrepancy:
    """Compare the printed closed form with the definitional integrals."""
    from .models import ParetoUnit

    u = as_point(u)
    d = vbzc_components(ParetoUnit(c), u, tol)
    return PrintedDiscrepancy(c, u, pareto_vbzc_printed(c, u), (d.i12, d.i21))


# --------------------------------------------------------------------------- reconstruction


def reconstruct_J(levels, i_values, mu: float) -> np.ndarray:
    """``J = mu u (1 - I) / (1 - u I)`` pointwise."""
    u = np.asarray(levels, dtype=float)
    iv = np.asarray(i_values, dtype=float)
    den = 1.0 - u * iv
    if np.any(den <= 0):
        k = int(np.flatnonzero(den <= 0)[0])
        raise InversionError(f"1 - u*I = {den[k]} at u={u[k]}")
    return mu * u * (1.0 - iv) / den


def reconstruct_conditional_quantile(i_slice, mu12: float) -> list[tuple[float, float]]:
    """Recover ``Q12(., u2)`` from a slice of ``I12`` at fixed ``u2`` and ``mu12(u2)``.

    ``i_slice`` is a sequence of ``(u1, I12)`` pairs strictly increasing in
    ``u1``. ``J`` is rebuilt pointwise and differentiated with second-order
    finite differences (central inside, one-sided at the ends).
    """
    arr = np.asarray(i_slice, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 3:
        raise DomainError("need at least three (u1, I12) pairs")
    u, iv = arr[:, 0], arr[:, 1]
    if np.any(np.diff(u) <= 0):
        raise DomainError("slice levels must be strictly increasing")
    if np.any((iv < 0) | (iv >= 1)):
        raise DomainError("slice values must lie in [0, 1)")
    j = reconstruct_J(u, iv, mu12)
    q = np.gradient(j, u, edge_order=2)
    return list(zip(u.tolist(), q.tolist()))


__all__ = [
    "Direction",
    "DirectionalPartials",
    "PrintedDiscrepancy",
    "VbzcPoint",
    "directional_partials",
    "pareto_vbzc_printed",
    "printed_discrepancy",
    "reconstruct_J",
    "reconstruct_conditional_quantile",
    "vbzc_components",
]
