"""Bidder type distributions and derived objects.

A :class:`TypeDistribution` is a continuously differentiable CDF ``F`` with
strictly positive density on ``(0, upper)``; the support lower bound is
normalized to zero.  Derived quantities used throughout the package:

* hazard rate          ``f(t) / (1 - F(t))``
* virtual value        ``V(t) = t - (1 - F(t)) / f(t)``
* highest order statistic of ``n - 1`` opponent draws
                       ``F1(t) = F(t)**(n-1)``,  ``f1(t) = (n-1) F(t)**(n-2) f(t)``

Optimizers require a monotone (nondecreasing) hazard rate; that property is
*checked*, never assumed — see :meth:`TypeDistribution.check_regularity`.

Built-in families: uniform, power-law ``F(t) = (t/upper)**a``, and a truncated
exponential.  A tabulated CDF (monotone-cubic interpolated) is accepted as
well, mainly so tests can construct irregular counterexamples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from ._numerics import bracketed_root, chebyshev_nodes
from .errors import DomainError

_FAMILIES = ("uniform", "power", "truncexp", "table")


@dataclass(frozen=True)
class RegularityReport:
    """Outcome of a monotone-hazard check on a grid."""

    is_regular: bool
    grid_size: int
    worst_decrease: float  # largest hazard drop between consecutive grid points


@dataclass(frozen=True, eq=False)
class TypeDistribution:
    """Value distribution on ``[0, upper]``.

    Construct through the classmethods (``uniform``, ``power``,
    ``truncated_exponential``, ``from_table``) rather than directly.
    """

    family: str
    upper: float
    a: float = 1.0            # power exponent
    rate: float = 1.0         # truncated-exponential rate
    _table: Optional[tuple] = field(default=None, repr=False)

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise DomainError(f"unknown family {self.family!r}")
        if not self.upper > 0.0:
            raise DomainError("support upper bound must be positive")
        if self.family == "power" and not self.a > 0.0:
            raise DomainError("power exponent must be positive")
        if self.family == "truncexp" and self.rate == 0.0:
            raise DomainError("truncated-exponential rate must be nonzero")

    # -- constructors -----------------------------------------------------

    @classmethod
    def uniform(cls, upper=1.0):
        return cls("uniform", float(upper))

    @classmethod
    def power(cls, a, upper=1.0):
        return cls("power", float(upper), a=float(a))

    @classmethod
    def truncated_exponential(cls, rate, upper=1.0):
        return cls("truncexp", float(upper), rate=float(rate))

    @classmethod
    def from_table(cls, points, cdf_values):
        """Tabulated CDF with monotone piecewise-cubic interpolation.

        ``points`` must start at 0 and end at the support upper bound;
        ``cdf_values`` must be strictly increasing from 0 to 1.
        """
        pts = np.asarray(points, dtype=float)
        cv = np.asarray(cdf_values, dtype=float)
        if pts.ndim != 1 or pts.shape != cv.shape or pts.size < 4:
            raise DomainError("need matching 1-d tables with at least 4 rows")
        if pts[0] != 0.0 or abs(cv[0]) > 1e-14 or abs(cv[-1] - 1.0) > 1e-12:
            raise DomainError("table must span F(0)=0 to F(upper)=1")
        if np.any(np.diff(pts) <= 0) or np.any(np.diff(cv) <= 0):
            raise DomainError("table must be strictly increasing")
        interp = PchipInterpolator(pts, cv)
        inverse = PchipInterpolator(cv, pts)
        self = cls("table", float(pts[-1]), _table=(interp, interp.derivative(), inverse))
        return self

    # -- domain handling ---------------------------------------------------

    def _check_support(self, t, *, include_upper=True):
        t = np.asarray(t, dtype=float)
        hi_ok = t <= self.upper if include_upper else t < self.upper
        if not np.all((t >= 0.0) & hi_ok):
            raise DomainError(
                f"type outside support [0, {self.upper}{']' if include_upper else ')'}"
            )
        return t

    # -- primitives --------------------------------------------------------

    def cdf(self, t):
        t = self._check_support(t)
        x = t / self.upper
        if self.family == "uniform":
            out = x
        elif self.family == "power":
            out = x ** self.a
        elif self.family == "truncexp":
            out = np.expm1(-self.rate * t) / np.expm1(-self.rate * self.upper)
        else:
            out = np.clip(self._table[0](t), 0.0, 1.0)
        return out if out.ndim else float(out)

    def pdf(self, t):
        t = self._check_support(t)
        if self.family == "uniform":
            out = np.full_like(t, 1.0 / self.upper)
        elif self.family == "power":
            out = self.a * t ** (self.a - 1.0) / self.upper ** self.a
        elif self.family == "truncexp":
            out = -self.rate * np.exp(-self.rate * t) / np.expm1(-self.rate * self.upper)
        else:
            out = np.maximum(self._table[1](t), 0.0)
        return out if out.ndim else float(out)

    def ppf(self, u):
        """Inverse CDF, for sampling.  ``u`` in [0, 1]."""
        u = np.asarray(u, dtype=float)
        if np.any((u < 0.0) | (u > 1.0)):
            raise DomainError("probability outside [0, 1]")
        if self.family == "uniform":
            out = u * self.upper
        elif self.family == "power":
            out = self.upper * u ** (1.0 / self.a)
        elif self.family == "truncexp":
            out = np.log1p(u * np.expm1(-self.rate * self.upper)) / (-self.rate)
        else:
            out = np.clip(self._table[2](u), 0.0, self.upper)
        return out if out.ndim else float(out)

    # -- derived objects ----------------------------------------------------

    def hazard(self, t):
        """``f(t) / (1 - F(t))``; undefined at the support upper bound."""
        t = self._check_support(t, include_upper=False)
        out = self.pdf(t) / (1.0 - self.cdf(t))
        return out if np.ndim(out) else float(out)

    def virtual_value(self, t):
        """``V(t) = t - (1 - F(t)) / f(t)``, extended by continuity to V(upper) = upper."""
        t = self._check_support(t)
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty_like(t_arr)
        at_top = t_arr >= self.upper
        out[at_top] = self.upper
        inner = ~at_top
        if np.any(inner):
            ti = t_arr[inner]
            out[inner] = ti - (1.0 - self.cdf(ti)) / self.pdf(ti)
        return out if np.ndim(t) else float(out[0])

    def order_stat_cdf(self, n, t):
        """CDF of the highest of ``n - 1`` independent draws."""
        _check_n(n)
        return self.cdf(t) ** (n - 1)

    def order_stat_pdf(self, n, t):
        """Density of the highest of ``n - 1`` independent draws."""
        _check_n(n)
        return (n - 1) * self.cdf(t) ** (n - 2) * self.pdf(t)

    def check_regularity(self, grid_size=1024, rel_tol=1e-9):
        """Report whether the hazard rate is nondecreasing on a grid.

        The grid spans ``[0, upper)``; a decrease larger than ``rel_tol``
        relative to the local hazard level marks the distribution irregular.
        """
        if grid_size < 2:
            raise DomainError("grid_size must be at least 2")
        grid = chebyshev_nodes(0.0, self.upper, grid_size + 1)[:-1]
        if self.family == "power" and self.a < 1.0:
            grid = grid[grid > 0.0]  # unbounded density at 0
        h = np.atleast_1d(self.hazard(grid))
        drops = h[:-1] - h[1:]
        scale = np.maximum(np.abs(h[:-1]), 1.0)
        worst = float(np.max(drops / scale)) if drops.size else 0.0
        return RegularityReport(is_regular=worst <= rel_tol,
                                grid_size=len(grid), worst_decrease=worst)


def _check_n(n):
    if int(n) != n or n < 2:
        raise DomainError("number of bidders must be an integer >= 2")


def parse_distribution(text):
    """Parse ``dist=uniform upper=1.0`` style key=value tokens.

    Recognized families: ``uniform``, ``power`` (needs ``a``), ``truncexp``
    (needs ``rate``).  ``upper`` defaults to 1.
    """
    kv = {}
    for tok in text.split():
        if "=" not in tok:
            raise DomainError(f"malformed token {tok!r}, expected key=value")
        key, val = tok.split("=", 1)
        kv[key.strip()] = val.strip()
    family = kv.pop("dist", None)
    if family is None:
        raise DomainError("missing dist= token")
    upper = float(kv.pop("upper", 1.0))
    if family == "uniform":
        extra = kv
        dist = TypeDistribution.uniform(upper)
    elif family == "power":
        if "a" not in kv:
            raise DomainError("power family needs a=")
        dist = TypeDistribution.power(float(kv.pop("a")), upper)
        extra = kv
    elif family == "truncexp":
        if "rate" not in kv:
            raise DomainError("truncexp family needs rate=")
        dist = TypeDistribution.truncated_exponential(float(kv.pop("rate")), upper)
        extra = kv
    else:
        raise DomainError(f"unknown family {family!r}")
    if extra:
        raise DomainError(f"unrecognized tokens: {sorted(extra)}")
    return dist


@dataclass(frozen=True)
class AuctionEnv:
    """Auction environment: value distribution, bidder count, seller's value."""

    dist: TypeDistribution
    n_bidders: int
    seller_value: float = 0.0

    def __post_init__(self):
        _check_n(self.n_bidders)
        if not 0.0 <= self.seller_value < self.dist.upper:
            raise DomainError("seller value must lie in [0, upper)")

    @property
    def upper(self):
        return self.dist.upper

    def order_cdf(self, t):
        return self.dist.order_stat_cdf(self.n_bidders, t)

    def order_pdf(self, t):
        return self.dist.order_stat_pdf(self.n_bidders, t)

    def risk_neutral_threshold(self):
        """Type equating the virtual value with the seller's value."""
        d, ts = self.dist, self.seller_value
        lo = 1e-12 * d.upper
        if d.virtual_value(lo) >= ts:
            return lo
        return bracketed_root(lambda t: d.virtual_value(t) - ts, lo, d.upper)
