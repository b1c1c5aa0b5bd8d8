"""Parametric bivariate families exposed through a common quantile interface.

Every model describes the pair ``(X1, X2)`` through

* marginal quantiles ``q1(u1)``, ``q2(u2)``,
* conditional quantiles ``q21(u1, u2)`` (of ``X2`` given ``X1 > Q1(u1)``) and
  ``q12(u1, u2)`` (of ``X1`` given ``X2 > Q2(u2)``),

plus whatever optional capabilities the family supports (density, product
moment, first-moment CDFs or quantiles). The surface modules look at
``model.capabilities`` and fall back to numeric paths when something is absent.

Quantile methods accept numpy arrays and optional complement levels
(``c1 = 1 - u1`` and so on). Integrals that run up to level 1 pass the
complement explicitly, so heavy upper tails are evaluated without the
cancellation in ``1 - u``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, ClassVar

import numpy as np
from scipy import special

from .errors import CapabilityError, DegenerateDenominatorError, DomainError, ValidationError
from .numerics import QuantilePoint, as_point


def _comp(u, c):
    return 1.0 - np.asarray(u, dtype=float) if c is None else np.asarray(c, dtype=float)


def _out(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


class BivariateQuantileModel:
    """Base class; subclasses override the capabilities they provide.

    ``capabilities`` lists the optional features: ``"q12"``, ``"q21"``,
    ``"density"``, ``"product_mean"``, ``"fm_cdfs"``, ``"fm_quantiles"``,
    ``"partial_means"`` (a closed-form ``quantile_box``), ``"atom"``.
    """

    capabilities: ClassVar[frozenset[str]] = frozenset()
    #: whether ``fm_quantiles`` is exact rather than an approximation
    fm_quantiles_exact: ClassVar[bool] = False
    #: support corners, used by x-space integrals
    support_lower: ClassVar[tuple[float, float]] = (0.0, 0.0)
    support_upper: ClassVar[tuple[float, float]] = (math.inf, math.inf)

    @property
    def finite_product_moment(self) -> bool:
        return True

    @property
    def finite_conditional_means(self) -> bool:
        return True

    def supports(self, name: str) -> bool:
        return name in self.capabilities

    def _missing(self, name: str):
        raise CapabilityError(f"{type(self).__name__} does not provide {name}")

    def q1(self, u1, c1=None):
        self._missing("q1")

    def q2(self, u2, c2=None):
        self._missing("q2")

    def q21(self, u1, u2, c1=None, c2=None):
        self._missing("q21")

    def q12(self, u1, u2, c1=None, c2=None):
        self._missing("q12")

    def quantile_product(self, p1, p2, c1=None, c2=None):
        """``Q1(p1) * Q21(p1, p2)``, the integrand of the partial product means."""
        return self.q1(p1, c1) * self.q21(p1, p2, c1, c2)

    def density(self, x1, x2):
        self._missing("density")

    def product_mean(self) -> float:
        """``E(X1 X2)``."""
        self._missing("product_mean")

    def quantile_product_mean(self) -> float | None:
        """Closed form of the unit-square integral of ``quantile_product``, if known."""
        return None

    def fm_marginal1(self, x1):
        self._missing("fm_cdfs")

    def fm_upper_conditional21(self, t1, x2):
        """``P1(X2 <= x2 | X1 > t1)`` under the first-moment distribution."""
        self._missing("fm_cdfs")

    def fm_quantiles(self, u1, u2):
        self._missing("fm_quantiles")

    def scaled(self, a1: float, a2: float) -> "ScaledModel":
        return ScaledModel(self, a1, a2)


# --------------------------------------------------------------------------- shifted Pareto


@dataclass(frozen=True)
class ParetoShifted(BivariateQuantileModel):
    """Bivariate Pareto with survival ``(1 + x1 + x2)^(-alpha)`` on ``x >= 0``."""

    alpha: float

    capabilities: ClassVar[frozenset[str]] = frozenset(
        {"q12", "q21", "density", "product_mean", "fm_cdfs", "fm_quantiles", "partial_means"}
    )

    def __post_init__(self):
        if not self.alpha > 2:
            raise DomainError(f"alpha must exceed 2 for a finite product moment, got {self.alpha}")

    def q1(self, u1, c1=None):
        return _out(_comp(u1, c1) ** (-1.0 / self.alpha) - 1.0)

    q2 = q1

    def q21(self, u1, u2, c1=None, c2=None):
        a = self.alpha
        return _out(_comp(u1, c1) ** (-1.0 / a) * (_comp(u2, c2) ** (-1.0 / a) - 1.0))

    def q12(self, u1, u2, c1=None, c2=None):
        return self.q21(u2, u1, c2, c1)

    def density(self, x1, x2):
        a = self.alpha
        return a * (a + 1.0) * (1.0 + np.asarray(x1) + np.asarray(x2)) ** (-(a + 2.0))

    def product_mean(self) -> float:
        a = self.alpha
        return 1.0 / ((a - 1.0) * (a - 2.0))

    def quantile_product_mean(self) -> float:
        a = self.alpha
        return a / ((a - 1.0) ** 2 * (a - 2.0))

    def quantile_box(self, lo1, hi1, lo2, hi2) -> float:
        """Closed-form integral of ``Q1 Q21`` over ``[lo1, hi1] x [lo2, hi2]``.

        The product quantile separates into ``(c1^-2k - c1^-k)(c2^-k - 1)``
        with ``k = 1/alpha`` and ``c = 1 - p``.
        """
        k = 1.0 / self.alpha
        a1 = _power_tail_integral(2 * k, lo1, hi1) - _power_tail_integral(k, lo1, hi1)
        a2 = _power_tail_integral(k, lo2, hi2) - (hi2 - lo2)
        return float(a1 * a2)

    # first-moment distribution, closed forms
    def _fm_tail(self, x):
        """``1 - F1^(1)(x)``: the first-moment marginal survival."""
        a = self.alpha
        x = np.asarray(x, dtype=float)
        return (1.0 + x) ** (-a) * (1.0 + a * x + (a - 1.0) * x * x)

    def _fm_cross(self, x1, x2):
        a = self.alpha
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        poly = 1.0 + a * x1 + a * x2 + (a - 1.0) * (x1 * x1 + x2 * x2) + a * (a - 1.0) * x1 * x2
        return (1.0 + x1 + x2) ** (-a) * poly

    def fm_joint(self, x1, x2):
        return _out(1.0 - self._fm_tail(x1) - self._fm_tail(x2) + self._fm_cross(x1, x2))

    def fm_marginal1(self, x1):
        return _out(1.0 - self._fm_tail(x1))

    fm_marginal2 = fm_marginal1

    def fm_upper_conditional21(self, t1, x2):
        # P1(X1 > t, X2 <= x2) = tail(t) - cross(t, x2)
        return _out(1.0 - self._fm_cross(t1, x2) / self._fm_tail(t1))

    def fm_tail1(self, x1):
        """``1 - F1^(1)(x1)``, accurate far in the tail."""
        return _out(self._fm_tail(x1))

    def fm_upper_survival21(self, t1, x2):
        """``P1(X2 > x2 | X1 > t1)`` without the cancellation of ``1 - cdf``."""
        return _out(self._fm_cross(t1, x2) / self._fm_tail(t1))

    def fm_quantiles(self, u1, u2):
        """High-level asymptotic first-moment quantiles (not exact)."""
        return pareto_shifted_fm_quantiles_asymptotic(self.alpha, (u1, u2))


def _power_tail_integral(k: float, lo: float, hi: float) -> float:
    """``int_lo^hi (1 - p)^-k dp`` for ``k < 1``, stable for short intervals and ``hi = 1``."""
    clo = 1.0 - lo
    e = 1.0 - k
    if hi >= 1.0:
        return clo**e / e
    return clo**e * -math.expm1(e * math.log1p(-(hi - lo) / clo)) / e


def pareto_shifted_quantiles(alpha: float, u) -> tuple[float, float]:
    """``(Q1(u1), Q21(u1, u2))`` of the shifted bivariate Pareto."""
    u = as_point(u)
    m = ParetoShifted(alpha)
    return m.q1(u.u1), m.q21(u.u1, u.u2)


def pareto_shifted_fm_quantiles_asymptotic(alpha: float, u) -> tuple[float, float]:
    if not alpha > 2:
        raise DomainError(f"alpha must exceed 2, got {alpha}")
    u1, u2 = (float(v) for v in u)
    e = 1.0 / (alpha - 2.0)
    return ((alpha - 1.0) / (1.0 - u1)) ** e, ((alpha - 1.0) / (1.0 - u1 + u1 * u2)) ** e


def pareto_shifted_fm_cdfs(alpha: float, x1: float, x2: float) -> tuple[float, float, float]:
    """The printed first-moment CDFs: joint, first marginal, and the ratio ``joint / marginal``.

    The third value is ``P1(X2 <= x2 | X1 <= x1)``, which is how the closed
    form conditions; it is undefined at ``x1 = 0``.
    """
    m = ParetoShifted(alpha)
    if x1 < 0 or x2 < 0:
        raise DomainError("first-moment CDFs need x1, x2 >= 0")
    joint = m.fm_joint(x1, x2)
    marg = m.fm_marginal1(x1)
    if marg <= 0.0:
        raise DegenerateDenominatorError(f"first-moment marginal mass is zero at x1={x1}")
    return joint, marg, joint / marg


# --------------------------------------------------------------------------- unit-scale Pareto


@dataclass(frozen=True)
class ParetoUnit(BivariateQuantileModel):
    """Bivariate Pareto with survival ``(x1 + x2 - 1)^(-c)`` on ``x1, x2 >= 1``.

    The conditional quantiles ``1 + (1-u2)^(-1/c)[(1-u1)^(-1/c) - 1]`` and the
    joint CDF pin the support to ``[1, inf)^2``.
    """

    c: float

    capabilities: ClassVar[frozenset[str]] = frozenset({"q12", "q21", "density"})
    support_lower: ClassVar[tuple[float, float]] = (1.0, 1.0)

    def __post_init__(self):
        if not self.c > 0:
            raise DomainError(f"shape c must be positive, got {self.c}")

    @property
    def finite_product_moment(self) -> bool:
        return self.c > 2

    @property
    def finite_conditional_means(self) -> bool:
        return self.c > 1

    def q1(self, u1, c1=None):
        return _out(_comp(u1, c1) ** (-1.0 / self.c))

    q2 = q1

    def q12(self, u1, u2, c1=None, c2=None):
        k = -1.0 / self.c
        return _out(1.0 + _comp(u2, c2) ** k * (_comp(u1, c1) ** k - 1.0))

    def q21(self, u1, u2, c1=None, c2=None):
        return self.q12(u2, u1, c2, c1)

    def density(self, x1, x2):
        c = self.c
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        s = x1 + x2 - 1.0
        inside = (x1 >= 1.0) & (x2 >= 1.0)
        return np.where(inside, c * (c + 1.0) * np.where(inside, s, 1.0) ** (-c - 2.0), 0.0)

    def cdf(self, x1, x2):
        c = self.c
        x1 = max(float(x1), 1.0)
        x2 = max(float(x2), 1.0)
        return (x1 + x2 - 1.0) ** (-c) - x1 ** (-c) - x2 ** (-c) + 1.0

    def survival(self, x1, x2):
        x1 = max(float(x1), 1.0)
        x2 = max(float(x2), 1.0)
        return (x1 + x2 - 1.0) ** (-self.c)

    def sample(self, n: int, seed: int) -> "BivariateSample":
        """Draw ``X2`` from its marginal, then ``X1`` from its law given ``X2 = x2``."""
        v1, v2 = _uniform_pairs(n, seed)
        x2 = v2 ** (-1.0 / self.c)
        x1 = 1.0 + x2 * (v1 ** (-1.0 / (self.c + 1.0)) - 1.0)
        return BivariateSample(x1, x2)

    def printed_A(self, x1: float, x2: float) -> float:
        """The closed form ``A(x1, x2)`` exactly as printed; ``nan`` where a power of a negative base appears."""
        c = self.c
        s = x1 + x2 - 1.0
        with np.errstate(invalid="ignore"):
            lead = np.float64(x2 - 1.0) ** (1.0 - c) - np.float64(s) ** (1.0 - c)
            up = np.float64(x1) ** (1.0 - c) - np.float64(s) ** (1.0 - c)
        return float(1.0 - lead * up / up)


def pareto_unit_conditional_quantiles(c: float, u) -> tuple[float, float]:
    """``(Q12(u1, u2), Q21(u1, u2))`` for :class:`ParetoUnit`."""
    u = as_point(u)
    m = ParetoUnit(c)
    return m.q12(u.u1, u.u2), m.q21(u.u1, u.u2)


# --------------------------------------------------------------------------- power model


@dataclass(frozen=True)
class PowerModel(BivariateQuantileModel):
    """``Q1(u1) = K1 u1^b1``, ``Q21(u1, u2) = K2 u1^b1 u2^b2``."""

    K1: float = 1.0
    K2: float = 1.0
    b1: float = 2.0
    b2: float = 3.0

    capabilities: ClassVar[frozenset[str]] = frozenset({"q21", "partial_means", "fm_quantiles"})
    fm_quantiles_exact: ClassVar[bool] = True

    def __post_init__(self):
        if min(self.K1, self.K2, self.b1, self.b2) <= 0:
            raise DomainError("PowerModel parameters must all be positive")

    def q1(self, u1, c1=None):
        return _out(self.K1 * np.asarray(u1, dtype=float) ** self.b1)

    def q21(self, u1, u2, c1=None, c2=None):
        return _out(self.K2 * np.asarray(u1, dtype=float) ** self.b1 * np.asarray(u2, dtype=float) ** self.b2)

    def quantile_product_mean(self) -> float:
        return self.K1 * self.K2 / ((2 * self.b1 + 1) * (self.b2 + 1))

    def quantile_box(self, lo1, hi1, lo2, hi2) -> float:
        """Closed-form integral of ``Q1 Q21 = K1 K2 p1^(2 b1) p2^b2`` over a box."""
        e1 = 2 * self.b1 + 1
        e2 = self.b2 + 1
        return float(self.K1 * self.K2 * (hi1**e1 - lo1**e1) / e1 * (hi2**e2 - lo2**e2) / e2)

    def fm_quantiles(self, u1, u2):
        """First-moment quantiles, reading the levels as the coordinates of the law.

        Reweighting by ``Q1 Q21`` makes the levels independent with CDFs
        ``p^(2 b1 + 1)`` and ``p^(b2 + 1)``, so the first-moment pair is
        ``(Q1(v1), Q21(v1, v2))`` at the transformed levels ``v``.
        """
        v1 = float(u1) ** (1.0 / (2 * self.b1 + 1))
        v2 = float(u2) ** (1.0 / (self.b2 + 1))
        return float(self.q1(v1)), float(self.q21(v1, v2))

    def printed_I(self, u1: float, u2: float) -> float:
        """The closed-form surface as printed (exponents ``b + 1``), kept as a cross-check only."""
        a = u1 ** (self.b1 + 1)
        b = u2 ** (self.b2 + 1)
        return (1 - a - b) / ((a - 1) * (b - 1))


def power_quantiles(model: PowerModel, u) -> tuple[float, float]:
    u1, u2 = (float(v) for v in u)
    return model.q1(u1), model.q21(u1, u2)


# --------------------------------------------------------------------------- degenerate


@dataclass(frozen=True)
class DegenerateModel(BivariateQuantileModel):
    """Point mass at ``(c1, c2)``: perfect equality."""

    c1: float
    c2: float

    capabilities: ClassVar[frozenset[str]] = frozenset(
        {"q12", "q21", "product_mean", "fm_quantiles", "atom", "partial_means"}
    )
    fm_quantiles_exact: ClassVar[bool] = True

    def __post_init__(self):
        if not (self.c1 > 0 and self.c2 > 0):
            raise DomainError("degenerate coordinates must be positive")

    def q1(self, u1, c1=None):
        return _out(np.full(np.shape(u1), self.c1))

    def q2(self, u2, c2=None):
        return _out(np.full(np.shape(u2), self.c2))

    def q21(self, u1, u2, c1=None, c2=None):
        return _out(np.full(np.broadcast(np.asarray(u1), np.asarray(u2)).shape, self.c2))

    def q12(self, u1, u2, c1=None, c2=None):
        return _out(np.full(np.broadcast(np.asarray(u1), np.asarray(u2)).shape, self.c1))

    def product_mean(self) -> float:
        return self.c1 * self.c2

    def quantile_product_mean(self) -> float:
        return self.c1 * self.c2

    def quantile_box(self, lo1, hi1, lo2, hi2) -> float:
        return self.c1 * self.c2 * (hi1 - lo1) * (hi2 - lo2)

    def fm_quantiles(self, u1, u2):
        return self.c1, self.c2

    @property
    def atom(self) -> tuple[float, float]:
        return self.c1, self.c2


# --------------------------------------------------------------------------- functional / scaled


@dataclass(frozen=True)
class FunctionalModel(BivariateQuantileModel):
    """A model assembled from user-supplied quantile callables (vectorized in numpy).

    Useful for synthetic counterexamples; complements are ignored.
    """

    q1_fn: Callable
    q21_fn: Callable
    q2_fn: Callable | None = None
    q12_fn: Callable | None = None

    @property
    def capabilities(self) -> frozenset[str]:  # type: ignore[override]
        caps = {"q21"}
        if self.q12_fn is not None:
            caps.add("q12")
        return frozenset(caps)

    def q1(self, u1, c1=None):
        return _out(np.broadcast_to(self.q1_fn(np.asarray(u1, dtype=float)), np.shape(u1)))

    def q21(self, u1, u2, c1=None, c2=None):
        u1 = np.asarray(u1, dtype=float)
        u2 = np.asarray(u2, dtype=float)
        return _out(np.broadcast_to(self.q21_fn(u1, u2), np.broadcast(u1, u2).shape))

    def q2(self, u2, c2=None):
        if self.q2_fn is None:
            self._missing("q2")
        return _out(self.q2_fn(np.asarray(u2, dtype=float)))

    def q12(self, u1, u2, c1=None, c2=None):
        if self.q12_fn is None:
            self._missing("q12")
        u1 = np.asarray(u1, dtype=float)
        u2 = np.asarray(u2, dtype=float)
        return _out(np.broadcast_to(self.q12_fn(u1, u2), np.broadcast(u1, u2).shape))


@dataclass(frozen=True)
class DensityModel(BivariateQuantileModel):
    """A model known only through its joint density on a box."""

    density_fn: Callable
    lower: tuple[float, float] = (0.0, 0.0)
    upper: tuple[float, float] = (math.inf, math.inf)

    capabilities: ClassVar[frozenset[str]] = frozenset({"density"})

    @property
    def support_lower(self) -> tuple[float, float]:  # type: ignore[override]
        return self.lower

    @property
    def support_upper(self) -> tuple[float, float]:  # type: ignore[override]
        return self.upper

    def density(self, x1, x2):
        return np.asarray(self.density_fn(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float)), dtype=float)


@dataclass(frozen=True)
class UnivariateModel:
    """A single variable given by its quantile function.

    ``fm_quantile`` (the first-moment quantile) is optional and only needed
    for the moment-based curve.
    """

    quantile: Callable
    fm_quantile: Callable | None = None
    dim: ClassVar[int] = 1

    def quantile_product(self, p, c=None):
        return np.asarray(self.quantile(np.asarray(p, dtype=float)), dtype=float)


@dataclass(frozen=True)
class ProductQuantileModel:
    """An n-dimensional model given only through its product quantile.

    ``func(p1, ..., pn)`` returns ``Q1(p1) Q21(p1,p2) ... Qn..1(p1..pn)`` and
    must accept an array in its last argument.
    """

    func: Callable
    dim: int

    def quantile_product(self, *p):
        return self.func(*p)


@dataclass(frozen=True)
class ScaledModel(BivariateQuantileModel):
    """The law of ``(a1 X1, a2 X2)`` for a base model of ``(X1, X2)``."""

    base: BivariateQuantileModel
    a1: float
    a2: float

    def __post_init__(self):
        if not (self.a1 > 0 and self.a2 > 0):
            raise DomainError("scale factors must be positive")

    @property
    def capabilities(self) -> frozenset[str]:  # type: ignore[override]
        caps = self.base.capabilities - {"fm_cdfs", "fm_quantiles"}
        if self.base.fm_quantiles_exact:
            caps |= {"fm_quantiles"}
        return caps

    @property
    def fm_quantiles_exact(self) -> bool:  # type: ignore[override]
        return self.base.fm_quantiles_exact

    @property
    def support_lower(self) -> tuple[float, float]:  # type: ignore[override]
        lo1, lo2 = self.base.support_lower
        return lo1 * self.a1, lo2 * self.a2

    @property
    def support_upper(self) -> tuple[float, float]:  # type: ignore[override]
        hi1, hi2 = self.base.support_upper
        return hi1 * self.a1, hi2 * self.a2

    @property
    def finite_product_moment(self) -> bool:
        return self.base.finite_product_moment

    @property
    def finite_conditional_means(self) -> bool:
        return self.base.finite_conditional_means

    @property
    def atom(self) -> tuple[float, float]:
        c1, c2 = self.base.atom
        return c1 * self.a1, c2 * self.a2

    def fm_quantiles(self, u1, u2):
        if not self.base.fm_quantiles_exact:
            self._missing("fm_quantiles")
        q1, q21 = self.base.fm_quantiles(u1, u2)
        return self.a1 * q1, self.a2 * q21

    def q1(self, u1, c1=None):
        return _out(self.a1 * np.asarray(self.base.q1(u1, c1)))

    def q2(self, u2, c2=None):
        return _out(self.a2 * np.asarray(self.base.q2(u2, c2)))

    def q21(self, u1, u2, c1=None, c2=None):
        return _out(self.a2 * np.asarray(self.base.q21(u1, u2, c1, c2)))

    def q12(self, u1, u2, c1=None, c2=None):
        return _out(self.a1 * np.asarray(self.base.q12(u1, u2, c1, c2)))

    def density(self, x1, x2):
        return self.base.density(np.asarray(x1) / self.a1, np.asarray(x2) / self.a2) / (self.a1 * self.a2)

    def product_mean(self) -> float:
        return self.a1 * self.a2 * self.base.product_mean()

    def quantile_product_mean(self) -> float | None:
        m = self.base.quantile_product_mean()
        return None if m is None else self.a1 * self.a2 * m

    def quantile_box(self, lo1, hi1, lo2, hi2) -> float:
        return self.a1 * self.a2 * self.base.quantile_box(lo1, hi1, lo2, hi2)


# --------------------------------------------------------------------------- lognormal


@dataclass(frozen=True)
class LognormalParams:
    """Bivariate lognormal: ``(log X1, log X2)`` is normal with these moments.

    ``sigma1 = sigma2 = 0`` is allowed and flags the degenerate limit.
    """

    mu1: float = 0.0
    mu2: float = 0.0
    sigma1: float = 1.0
    sigma2: float = 1.0
    rho: float = 0.5

    def __post_init__(self):
        if self.sigma1 < 0 or self.sigma2 < 0:
            raise DomainError("log-scale standard deviations must be non-negative")
        if not -1.0 < self.rho < 1.0:
            raise DomainError("rho must lie in (-1, 1)")

    @property
    def degenerate(self) -> bool:
        return self.sigma1 == 0.0 and self.sigma2 == 0.0

    def scaled(self, a1: float, a2: float) -> "LognormalParams":
        return LognormalParams(self.mu1 + math.log(a1), self.mu2 + math.log(a2), self.sigma1, self.sigma2, self.rho)


@dataclass(frozen=True)
class BivariateSample:
    """Paired strictly positive observations."""

    x1: np.ndarray
    x2: np.ndarray

    def __post_init__(self):
        x1 = np.array(self.x1, dtype=float)
        x2 = np.array(self.x2, dtype=float)
        if x1.ndim != 1 or x1.shape != x2.shape:
            raise ValidationError("x1 and x2 must be 1-d arrays of equal length")
        if x1.size < 1:
            raise ValidationError("a sample needs at least one pair")
        for name, col in (("x1", x1), ("x2", x2)):
            bad = np.flatnonzero(~np.isfinite(col) | (col <= 0))
            if bad.size:
                raise ValidationError(f"{name} must be finite and positive, got {col[bad[0]]!r}", row=int(bad[0]) + 1)
        x1.flags.writeable = False
        x2.flags.writeable = False
        object.__setattr__(self, "x1", x1)
        object.__setattr__(self, "x2", x2)

    @classmethod
    def from_pairs(cls, pairs) -> "BivariateSample":
        arr = np.asarray(list(pairs), dtype=float).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1])

    def __len__(self) -> int:
        return int(self.x1.size)

    @property
    def n(self) -> int:
        return len(self)

    def pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.x1.tolist(), self.x2.tolist()))

    def scaled(self, a1: float, a2: float) -> "BivariateSample":
        return BivariateSample(self.x1 * a1, self.x2 * a2)

    def swapped(self) -> "BivariateSample":
        return BivariateSample(self.x2, self.x1)


def _uniform_pairs(n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """``2n`` uniforms in (0, 1) from PCG64: 53-bit integers mapped to cell midpoints."""
    if n < 1:
        raise DomainError("sample size must be at least 1")
    rng = np.random.Generator(np.random.PCG64(int(seed) & 0xFFFFFFFFFFFFFFFF))
    k = rng.integers(0, 1 << 53, size=(n, 2), dtype=np.uint64)
    v = (k.astype(np.float64) + 0.5) * 2.0**-53
    return v[:, 0], v[:, 1]


def lognormal_sample(params: LognormalParams, n: int, seed: int) -> BivariateSample:
    """Draw ``n`` pairs ``(exp Z1, exp Z2)`` with ``(Z1, Z2)`` bivariate normal.

    Normals come from the inverse normal CDF (``scipy.special.ndtri``) applied
    to PCG64 uniforms, then a Cholesky step introduces the correlation.
    """
    if params.degenerate:
        if n < 1:
            raise DomainError("sample size must be at least 1")
        return BivariateSample(np.full(n, math.exp(params.mu1)), np.full(n, math.exp(params.mu2)))
    v1, v2 = _uniform_pairs(n, seed)
    z1 = special.ndtri(v1)
    w = special.ndtri(v2)
    z2 = params.rho * z1 + math.sqrt(1.0 - params.rho**2) * w
    return BivariateSample(np.exp(params.mu1 + params.sigma1 * z1), np.exp(params.mu2 + params.sigma2 * z2))


def _std_quantile(u, c):
    u = np.asarray(u, dtype=float)
    c = _comp(u, c)
    return np.where(u <= 0.5, special.ndtri(np.minimum(u, 0.5)), -special.ndtri(np.minimum(c, 0.5)))


_TAB_Z = np.linspace(-12.0, 12.0, 24_001)


@functools.lru_cache(maxsize=256)
def _upper_tail_table(rho: float, u2: float, c2: float) -> tuple[np.ndarray, np.ndarray]:
    """Log CDF and log survival of ``Z1 | Z2 > Phi^-1(u2)`` on ``_TAB_Z``.

    The conditional density is ``phi(z) * Phi((rho z - b)/s) / (1 - u2)``;
    cumulative Simpson sums tabulate both tails.
    """
    from scipy.integrate import cumulative_simpson

    b = float(_std_quantile(u2, c2))
    s = math.sqrt(1.0 - rho * rho)
    logdens = special.log_ndtr((rho * _TAB_Z - b) / s) - 0.5 * _TAB_Z**2
    shift = logdens.max()
    dens = np.exp(logdens - shift)
    cdf = cumulative_simpson(dens, x=_TAB_Z, initial=0.0)
    sf = cumulative_simpson(dens[::-1], x=-_TAB_Z[::-1], initial=0.0)[::-1]
    total = cdf[-1]
    # both ends carry ~1e-30 mass beyond the grid; keep logs finite
    tiny = 1e-300
    cdf = np.maximum(cdf / total, tiny)
    sf = np.maximum(sf / total, tiny)
    cdf = np.maximum.accumulate(cdf)
    sf = np.minimum.accumulate(sf)
    return np.log(cdf), np.log(sf)


def _conditional_std_quantile(rho: float, p, cp, u2: float, c2: float):
    logcdf, logsf = _upper_tail_table(rho, float(u2), float(c2))
    p = np.asarray(p, dtype=float)
    cp = _comp(p, cp)
    lo = np.interp(np.log(np.maximum(p, 1e-300)), logcdf, _TAB_Z)
    # survival decreases in z: interpolate on the reversed arrays
    hi = np.interp(np.log(np.maximum(cp, 1e-300)), logsf[::-1], _TAB_Z[::-1])
    return np.where(p <= 0.5, lo, hi)


@dataclass(frozen=True)
class LognormalModel(BivariateQuantileModel):
    """Quantile interface for :class:`LognormalParams`.

    Conditional quantiles come from a tabulated upper-tail conditional CDF
    (24001 abscissae over +-12 standard deviations), inverted by log-scale
    interpolation.
    """

    params: LognormalParams = field(default_factory=LognormalParams)

    capabilities: ClassVar[frozenset[str]] = frozenset({"q12", "q21", "density", "product_mean"})

    def __post_init__(self):
        if self.params.sigma1 <= 0 or self.params.sigma2 <= 0:
            raise DomainError("LognormalModel needs positive sigmas; use DegenerateModel for the limit")

    def q1(self, u1, c1=None):
        p = self.params
        return _out(np.exp(p.mu1 + p.sigma1 * _std_quantile(u1, c1)))

    def q2(self, u2, c2=None):
        p = self.params
        return _out(np.exp(p.mu2 + p.sigma2 * _std_quantile(u2, c2)))

    def _cond(self, p, cp, u, cu, mu, sigma):
        u = float(u)
        cu = 1.0 - u if cu is None else float(cu)
        z = _conditional_std_quantile(self.params.rho, p, cp, u, cu)
        return _out(np.exp(mu + sigma * z))

    def q12(self, u1, u2, c1=None, c2=None):
        return self._broadcast_cond(u1, u2, c1, c2, self.params.mu1, self.params.sigma1)

    def q21(self, u1, u2, c1=None, c2=None):
        return self._broadcast_cond(u2, u1, c2, c1, self.params.mu2, self.params.sigma2)

    def _broadcast_cond(self, p, u, cp, cu, mu, sigma):
        # tables are keyed on the conditioning level, so loop over its distinct values
        u = np.asarray(u, dtype=float)
        if u.ndim == 0:
            return self._cond(p, cp, float(u), cu, mu, sigma)
        p_b, u_b = np.broadcast_arrays(np.asarray(p, dtype=float), u)
        cp_b = None if cp is None else np.broadcast_to(np.asarray(cp, dtype=float), p_b.shape)
        cu_b = 1.0 - u_b if cu is None else np.broadcast_to(np.asarray(cu, dtype=float), u_b.shape)
        out = np.empty(p_b.shape)
        for val in np.unique(u_b):
            mask = u_b == val
            out[mask] = self._cond(p_b[mask], None if cp_b is None else cp_b[mask], val, float(cu_b[mask][0]), mu, sigma)
        return out

    def density(self, x1, x2):
        p = self.params
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        z1 = (np.log(x1) - p.mu1) / p.sigma1
        z2 = (np.log(x2) - p.mu2) / p.sigma2
        r = p.rho
        q = (z1 * z1 - 2 * r * z1 * z2 + z2 * z2) / (1 - r * r)
        norm = 2 * math.pi * p.sigma1 * p.sigma2 * math.sqrt(1 - r * r)
        return np.exp(-0.5 * q) / (norm * x1 * x2)

    def product_mean(self) -> float:
        p = self.params
        v = p.sigma1**2 + p.sigma2**2 + 2 * p.rho * p.sigma1 * p.sigma2
        return math.exp(p.mu1 + p.mu2 + 0.5 * v)

    def sample(self, n: int, seed: int) -> BivariateSample:
        return lognormal_sample(self.params, n, seed)


def uniform_levels(k: int) -> np.ndarray:
    """``k`` cell-midpoint levels ``(i + 1/2)/k``, the interior test lattice."""
    return (np.arange(k) + 0.5) / k


__all__ = [
    "BivariateQuantileModel",
    "BivariateSample",
    "DegenerateModel",
    "DensityModel",
    "FunctionalModel",
    "LognormalModel",
    "LognormalParams",
    "ParetoShifted",
    "ParetoUnit",
    "PowerModel",
    "ProductQuantileModel",
    "QuantilePoint",
    "ScaledModel",
    "UnivariateModel",
    "lognormal_sample",
    "pareto_shifted_fm_cdfs",
    "pareto_shifted_fm_quantiles_asymptotic",
    "pareto_shifted_quantiles",
    "pareto_unit_conditional_quantiles",
    "power_quantiles",
    "uniform_levels",
]
