"""Closed-form equilibrium bid curves for three selling mechanisms.

All three mechanisms share one payment identity: writing ``P(t)`` for the
expected payment of a type-``t`` bidder and ``q(t)`` for her equilibrium win
probability, local incentive compatibility pins

    P'(t) = mwtp(t, q(t)) * q'(t),

so ``P(t) = int v(s) q'(s) s ds + P(threshold)`` with
``v(s) = 1 + eta*lam*q(s) + eta*(1 - q(s)) = 1 + eta + eta*(lam-1)*q(s)``,
and the bid is ``beta(t) = P(t) / q(t)``.  The mechanisms differ only in
``q`` and in the boundary payment:

* public reserve ``r``:  ``q = F1`` above the threshold type ``t_r`` and 0
  below; ``P(t_r) = F1(t_r) * r`` with ``r = (1 + eta) * t_r``.
* secret random reserve: the seller draws a threshold type from
  ``F0(x) = (x / t_bar_r)**K`` and charges that type's own bid as the
  reserve; every type then wins with ``q(t) = F0(t) * F1(t) > 0`` and the
  curve has no boundary constant (``P(0) = 0``).
* auction followed by a posted price: ``q = F1`` above ``t_r`` with boundary
  ``P(t_r) = F1(t_r) * r``, where ``r`` solves the two-threshold condition
  of :func:`tioli_pricing` (larger than the public ``(1+eta) t_r``).

Secret-reserve integrals use the substitution ``u = F0(s)`` so that the
boundary layer of width ``t_bar_r / K`` never has to be resolved by brute
force, and ratios like ``int q / q(t)`` are computed in a scaled form that
cannot underflow even for K ~ 1e4.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.interpolate import PchipInterpolator

from ._numerics import chebyshev_nodes, cumulative_integral, integrate
from .distributions import AuctionEnv
from .errors import DomainError, NumericsError, RegularityError
from .preferences import LossParams

DEFAULT_NODES = 513

# 24-point Gauss-Legendre rule on [0, 1] for the scaled secret-reserve ratios.
_W_NODES, _W_WEIGHTS = np.polynomial.legendre.leggauss(24)
_W_NODES = 0.5 * (_W_NODES + 1.0)
_W_WEIGHTS = 0.5 * _W_WEIGHTS


def _require_regular(env):
    report = env.dist.check_regularity()
    if not report.is_regular:
        raise RegularityError(
            f"hazard rate decreases by {report.worst_decrease:.2e} on the check grid; "
            "equilibrium and optimizer formulas need a monotone hazard"
        )


def _fmt(x):
    return format(float(x), ".17g")


@dataclass(frozen=True, eq=False)
class BidCurve:
    """Tabulated strictly-increasing bid function with monotone-cubic interpolation.

    ``types``/``bids``/``win_probs`` cover the active domain
    ``[threshold, upper]``.  Types below ``threshold`` abstain; ``bid`` maps
    them to 0.0 (a bid of zero never meets a positive reserve).
    """

    types: np.ndarray
    bids: np.ndarray
    win_probs: np.ndarray
    threshold: float
    reserve: Optional[float] = None

    def __post_init__(self):
        types = np.asarray(self.types, dtype=float)
        bids = np.asarray(self.bids, dtype=float)
        if np.any(np.diff(types) <= 0.0):
            raise NumericsError("bid-curve type grid must be strictly increasing")
        active = types > self.threshold
        if np.any(np.diff(bids[active]) <= 0.0):
            raise NumericsError("bids must be strictly increasing on the active domain")
        object.__setattr__(self, "types", types)
        object.__setattr__(self, "bids", bids)
        object.__setattr__(self, "win_probs", np.asarray(self.win_probs, dtype=float))
        object.__setattr__(self, "_interp", PchipInterpolator(types, bids))

    @property
    def max_bid(self):
        return float(self.bids[-1])

    def bid(self, t):
        """Bid of type ``t``; 0.0 (abstention) below the threshold type."""
        t = np.asarray(t, dtype=float)
        out = np.where(t >= self.threshold, self._interp(np.clip(t, self.types[0], None)), 0.0)
        return out if out.ndim else float(out)

    def inverse(self, b):
        """Type whose bid is ``b``, clamped to the active domain ends."""
        b_arr = np.atleast_1d(np.asarray(b, dtype=float))
        out = np.empty_like(b_arr)
        lo_bid, hi_bid = self.bids[0], self.bids[-1]
        for i, bi in enumerate(b_arr):
            if bi <= lo_bid:
                out[i] = self.types[0]
            elif bi >= hi_bid:
                out[i] = self.types[-1]
            else:
                j = int(np.searchsorted(self.bids, bi)) - 1
                seg = self._interp
                lo, hi = self.types[j], self.types[min(j + 1, len(self.types) - 1)]
                f = lambda x: seg(x) - bi
                # bisection/secant hybrid on the bracketing segment
                from ._numerics import bracketed_root
                out[i] = bracketed_root(f, lo, hi, tol=1e-14)
        return out if np.ndim(b) else float(out[0])

    def write_csv(self, path_or_file):
        """Write ``type,bid,win_prob`` rows at the grid nodes (17 significant digits)."""
        if hasattr(path_or_file, "write"):
            self._write(path_or_file)
        else:
            with open(path_or_file, "w", newline="") as fh:
                self._write(fh)

    def _write(self, fh):
        fh.write("type,bid,win_prob\n")
        for t, b, q in zip(self.types, self.bids, self.win_probs):
            fh.write(f"{_fmt(t)},{_fmt(b)},{_fmt(q)}\n")

    def to_csv_string(self):
        buf = io.StringIO()
        self._write(buf)
        return buf.getvalue()


# ---------------------------------------------------------------------------
# reserve <-> threshold type
# ---------------------------------------------------------------------------

def reserve_for_threshold(t_r, params, upper=None):
    """Public reserve price that makes ``t_r`` the marginal participating type.

    The marginal type expects to never win, so her deviation gain from bidding
    the reserve is ``F1(t_r) ((1+eta) t_r - r)``; indifference gives
    ``r = (1 + eta) * t_r``.
    """
    if t_r < 0.0 or (upper is not None and t_r > upper):
        raise DomainError("threshold type outside support")
    return (1.0 + params.eta) * t_r


@dataclass(frozen=True)
class ThresholdResult:
    threshold: float
    clamped: bool  # True when the reserve is non-binding (0) or fully excluding (upper)


def threshold_for_reserve(r, params, upper):
    """Invert ``r = (1+eta) t_r``, clamping to the support with a flag."""
    if r < 0.0:
        raise DomainError("reserve must be nonnegative")
    t_r = r / (1.0 + params.eta)
    if t_r > upper:
        return ThresholdResult(upper, True)
    return ThresholdResult(t_r, t_r < 0.0)


# ---------------------------------------------------------------------------
# public deterministic reserve
# ---------------------------------------------------------------------------

def payment_slope(env, params, s):
    """``v(s) f1(s) s`` with ``v = 1 + eta + eta (lam - 1) F1`` — the integrand
    of every on-path expected-payment integral."""
    s = np.asarray(s, dtype=float)
    f1 = env.order_pdf(s)
    v = 1.0 + params.eta + params.eta * (params.lam - 1.0) * env.order_cdf(s)
    out = v * f1 * s
    return out if out.ndim else float(out)


def expected_payment_public(env, params, t_r, t):
    """Expected payment ``F1(t) beta(t)`` of type ``t`` under threshold ``t_r``;
    zero below the threshold."""
    if not 0.0 <= t_r < env.upper:
        raise DomainError("threshold type outside [0, upper)")
    if t < t_r:
        return 0.0
    boundary = (1.0 + params.eta) * env.order_cdf(t_r) * t_r
    return integrate(lambda s: payment_slope(env, params, s), t_r, min(t, env.upper)) + boundary


def bid_public_reserve(env, params, t_r, n_nodes=DEFAULT_NODES):
    """Equilibrium bid curve for a public reserve with threshold type ``t_r``."""
    if not 0.0 <= t_r < env.upper:
        raise DomainError("threshold type outside [0, upper)")
    _require_regular(env)
    reserve = reserve_for_threshold(t_r, params, env.upper)
    nodes = chebyshev_nodes(t_r, env.upper, n_nodes)
    cum = cumulative_integral(lambda s: payment_slope(env, params, s), nodes)
    payments = cum + env.order_cdf(t_r) * reserve
    f1cdf = env.order_cdf(nodes)
    bids = np.empty_like(nodes)
    positive = f1cdf > 0.0
    bids[positive] = payments[positive] / f1cdf[positive]
    bids[~positive] = 0.0  # only the t = 0 node when t_r = 0; beta(0+) -> 0
    return BidCurve(nodes, bids, f1cdf, threshold=t_r, reserve=reserve)


# ---------------------------------------------------------------------------
# secret and random reserve
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SecretReserveSpec:
    """Power-law distribution of threshold types on ``[0, t_bar_r]``:
    ``F0(x) = (x / t_bar_r)**K``.  Large ``K`` piles the mass just below
    ``t_bar_r`` while leaving every type a positive win probability."""

    t_bar_r: float
    K: float

    def __post_init__(self):
        if not self.t_bar_r > 0.0:
            raise DomainError("largest threshold type must be positive")
        if not self.K > 0.0:
            raise DomainError("K must be positive")

    def f0_cdf(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < 0.0):
            raise DomainError("threshold type below 0")
        out = np.where(x >= self.t_bar_r, 1.0,
                       np.power(np.minimum(x, self.t_bar_r) / self.t_bar_r, self.K))
        return out if out.ndim else float(out)

    def f0_ppf(self, u):
        u = np.asarray(u, dtype=float)
        out = self.t_bar_r * np.power(u, 1.0 / self.K)
        return out if out.ndim else float(out)


def winning_prob_secret(spec, env, t):
    """``q(t) = F0(min(t, t_bar_r)) F1(t)``: beat the drawn threshold and all opponents."""
    t = np.asarray(t, dtype=float)
    if np.any((t < 0.0) | (t > env.upper)):
        raise DomainError("type outside support")
    out = spec.f0_cdf(np.minimum(t, spec.t_bar_r)) * env.order_cdf(t)
    return out if out.ndim else float(out)


def _scaled_ratios(spec, env, t):
    """Underflow-safe ratios  int_0^t q ds / q(t)  and  int_0^t q^2 ds / q(t)^2
    for ``t <= t_bar_r``, via ``u = F0(s)`` rescaled by ``F0(t)``:

        int q / q   = (t / K) * int_0^1 w**(1/K)     F1(w**(1/K) t)    dw / F1(t)
        int q2 / q2 = (t / K) * int_0^1 w**(1 + 1/K) F1(w**(1/K) t)**2 dw / F1(t)**2
    """
    t = np.asarray(t, dtype=float)
    K = spec.K
    w_pow = _W_NODES ** (1.0 / K)                       # shape (nw,)
    s = t[:, None] * w_pow[None, :]                     # (nt, nw)
    f1 = env.order_cdf(s)
    f1_t = env.order_cdf(t)
    safe = f1_t > 0.0
    ratio1 = np.zeros_like(t)
    ratio2 = np.zeros_like(t)
    if np.any(safe):
        rel = f1[safe] / f1_t[safe, None]
        ratio1[safe] = (t[safe] / K) * ((w_pow[None, :] * rel) @ _W_WEIGHTS)
        ratio2[safe] = (t[safe] / K) * ((_W_NODES[None, :] * w_pow[None, :] * rel ** 2) @ _W_WEIGHTS)
    return ratio1, ratio2


def _secret_nodes(spec, env, n_nodes):
    """Chebyshev base grid, densified 10x just below ``t_bar_r`` where the win
    probability rises steeply, plus F0-quantile nodes so any K is resolved."""
    T, ub = spec.t_bar_r, env.upper
    base = chebyshev_nodes(0.0, ub, n_nodes)
    window = base[(base >= 0.9 * T) & (base <= T)]
    dense = np.linspace(0.9 * T, T, max(10 * (len(window) + 1), 32))
    quantiles = spec.f0_ppf(np.linspace(0.02, 1.0, 50))
    nodes = np.unique(np.concatenate([base, dense, quantiles, [T]]))
    return nodes[(nodes >= 0.0) & (nodes <= ub)]


def bid_secret_reserve(spec, env, params, n_nodes=DEFAULT_NODES):
    """Equilibrium bid curve when the reserve is drawn as ``beta(t_r~)`` with
    ``t_r~ ~ F0``.  Defined on all of ``(0, upper]`` with ``beta(0+) = 0``."""
    _require_regular(env)
    T = spec.t_bar_r
    if T > env.upper:
        raise DomainError("largest threshold type exceeds the support")
    eta, lam = params.eta, params.lam
    nodes = _secret_nodes(spec, env, n_nodes)
    below = nodes <= T
    q = winning_prob_secret(spec, env, nodes)

    bids = np.zeros_like(nodes)
    # below the top threshold: closed form from integrating P' by parts,
    #   beta = (1+eta)(t - intq/q) + eta(lam-1)/2 * q * (t - intq2/q2)
    tb = nodes[below]
    r1, r2 = _scaled_ratios(spec, env, tb)
    bids[below] = (1.0 + eta) * (tb - r1) + 0.5 * eta * (lam - 1.0) * q[below] * (tb - r2)

    # above: q = F1, so P(t) = P(T) + int_T^t v f1 s ds
    above = ~below
    if np.any(above):
        f1_T = env.order_cdf(T)
        p_T = f1_T * float(bids[below][-1])
        seg = np.concatenate([[T], nodes[above]])
        cum = cumulative_integral(lambda s: payment_slope(env, params, s), seg)[1:]
        bids[above] = (p_T + cum) / env.order_cdf(nodes[above])

    if nodes[0] == 0.0:
        bids[0] = 0.0
    return BidCurve(nodes, bids, q, threshold=0.0, reserve=None)


def reserve_price_distribution(spec, env, params, n_points=201, curve=None):
    """Committed reserve-price map: threshold draws ``t_r~`` against the prices
    ``r(t_r~) = beta(t_r~)`` they commit the seller to, with their CDF ``F0``.

    Returns ``(thresholds, reserves, f0)`` arrays on ``[0, t_bar_r]``.
    """
    if curve is None:
        curve = bid_secret_reserve(spec, env, params)
    thresholds = np.linspace(0.0, spec.t_bar_r, n_points)
    reserves = np.asarray(curve.bid(np.maximum(thresholds, curve.types[0])))
    reserves[0] = 0.0
    return thresholds, reserves, np.asarray(spec.f0_cdf(thresholds))


# ---------------------------------------------------------------------------
# auction followed by a take-it-or-leave-it posted price
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TioliSpec:
    """Auction with reserve ``reserve`` followed (with probability ``nu``, when
    the reserve is unmet) by a posted price ``posted_price`` that exactly the
    types in ``[t_p, t_r)`` accept.  ``alpha * F1(t_r)`` is the ex-ante win
    probability of an accepting type."""

    t_r: float
    t_p: float
    nu: float
    alpha: float
    reserve: float
    posted_price: float


def tioli_alpha(nu, t_p, t_r, env):
    """Allocation multiplier: with probability ``nu`` the posted stage runs, no
    opponent met the reserve, and a uniform tie-break picks one acceptor:

        alpha = nu * (1 - rho**N) / (N (1 - rho)),   rho = F(t_p) / F(t_r),

    evaluated as ``nu * mean(rho**k, k < N)`` which is exact for rho -> 1.
    """
    if not 0.0 <= nu <= 1.0:
        raise DomainError("nu outside [0, 1]")
    if not 0.0 <= t_p < t_r <= env.upper:
        raise DomainError("need 0 <= t_p < t_r <= upper")
    rho = env.dist.cdf(t_p) / env.dist.cdf(t_r)
    n = env.n_bidders
    return nu * float(np.mean(rho ** np.arange(n)))


def tioli_alpha_binomial(nu, t_p, t_r, env):
    """Binomial-sum cross-check of :func:`tioli_alpha`: average ``1/(1+k)`` over
    the number ``k`` of rival acceptors, conditional on no rival meeting the reserve."""
    from math import comb

    if not 0.0 <= t_p < t_r <= env.upper:
        raise DomainError("need 0 <= t_p < t_r <= upper")
    rho = env.dist.cdf(t_p) / env.dist.cdf(t_r)
    n = env.n_bidders
    total = sum(
        comb(n - 1, k) * (1.0 - rho) ** k * rho ** (n - 1 - k) / (k + 1.0)
        for k in range(n)
    )
    return nu * total


def tioli_pricing(t_r, t_p, alpha, env, params):
    """Posted price and reserve implementing thresholds ``(t_p, t_r)``.

    The accepting threshold pins ``p = (1+eta) t_p``.  The bidding threshold
    ``t_r`` must be indifferent, expecting to stay out, between bidding the
    reserve and waiting for the posted price; that gives

        r = t_r [ (1-alpha)(1+eta) + eta (lam-1) (1-alpha) alpha F1(t_r) ]
            + (1+eta) alpha t_p.

    The waiting option keeps the threshold type attached (she still wins with
    probability ``alpha F1(t_r)``), which is what pushes ``r`` above the
    public-reserve value ``(1+eta) t_r`` for moderate ``alpha``.
    """
    if not 0.0 <= t_p < t_r <= env.upper:
        raise DomainError("need 0 <= t_p < t_r <= upper")
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    eta, lam = params.eta, params.lam
    f1_r = env.order_cdf(t_r)
    p = (1.0 + eta) * t_p
    r = t_r * ((1.0 - alpha) * (1.0 + eta)
               + eta * (lam - 1.0) * (1.0 - alpha) * alpha * f1_r) \
        + (1.0 + eta) * alpha * t_p
    return r, p


def bid_tioli(env, params, t_r, r, n_nodes=DEFAULT_NODES):
    """Auction-stage bid curve: same slope as the public-reserve curve but
    anchored at ``beta(t_r) = r`` (the TIOLI reserve exceeds ``(1+eta) t_r``)."""
    if not 0.0 < t_r < env.upper:
        raise DomainError("threshold type outside (0, upper)")
    _require_regular(env)
    nodes = chebyshev_nodes(t_r, env.upper, n_nodes)
    cum = cumulative_integral(lambda s: payment_slope(env, params, s), nodes)
    f1cdf = env.order_cdf(nodes)
    payments = cum + env.order_cdf(t_r) * r
    bids = payments / f1cdf
    return BidCurve(nodes, bids, f1cdf, threshold=t_r, reserve=r)


# ---------------------------------------------------------------------------
# mechanism tags
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PublicReserve:
    reserve: float

    def __post_init__(self):
        if self.reserve < 0.0:
            raise DomainError("reserve must be nonnegative")


@dataclass(frozen=True)
class SecretRandomReserve:
    spec: SecretReserveSpec


@dataclass(frozen=True)
class AuctionThenTioli:
    spec: TioliSpec


MechanismSpec = Union[PublicReserve, SecretRandomReserve, AuctionThenTioli]
