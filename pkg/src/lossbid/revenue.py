"""Expected seller revenue (payments plus retained value) per mechanism.

Revenue always means the seller's full expected payoff: the sum of expected
payments from all N bidders plus ``tS`` times the no-trade probability.

Every double integral ``int int_payments f(t) dt`` is reduced analytically to
a single integral by swapping the integration order:

    int_a^ub [ int_a^t h(s) ds ] f(t) dt  =  int_a^ub h(s) (1 - F(s)) ds,

and for the secret scheme one further integration by parts removes the (very
steep) ``q'`` factor entirely:

    int_0^ub v(q) q' s (1 - F) ds  ->  - int q(s) d/ds [ s (1 - F(s)) ] ds,

leaving only bounded smooth integrands in ``q`` and ``q**2`` that a
substitution ``u = F0(s)`` tames for arbitrarily large K.  The nested-
quadrature originals are kept (``revenue_public_nested``) and the two routes
are asserted equal to 1e-8 in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ._numerics import integrate
from .equilibrium import (
    AuctionThenTioli,
    MechanismSpec,
    PublicReserve,
    SecretRandomReserve,
    SecretReserveSpec,
    TioliSpec,
    payment_slope,
    reserve_for_threshold,
)
from .errors import DomainError
from .preferences import LossParams


@dataclass(frozen=True)
class RevenueReport:
    """Analytic revenue decomposition for one mechanism configuration."""

    label: str
    mechanism: Optional[MechanismSpec]
    revenue: float
    trade_prob: float
    no_trade_term: float        # tS * P(no trade): the seller keeps the good
    per_bidder_payment: float   # revenue = N * per_bidder_payment + no_trade_term
    param_summary: str = ""


def _survival_weighted_slope(env, params, a, b):
    """``int_a^b v(s) f1(s) s (1 - F(s)) ds`` — the order-swapped payment mass."""
    return integrate(lambda s: payment_slope(env, params, s) * (1.0 - env.dist.cdf(s)), a, b)


def revenue_public(env, params, t_r):
    """Revenue of a public reserve with threshold type ``t_r``."""
    if not 0.0 <= t_r <= env.upper:
        raise DomainError("threshold type outside support")
    n, ts = env.n_bidders, env.seller_value
    r = reserve_for_threshold(t_r, params, env.upper)
    boundary = env.order_cdf(t_r) * r
    per_bidder = _survival_weighted_slope(env, params, t_r, env.upper) \
        + (1.0 - env.dist.cdf(t_r)) * boundary
    no_trade_prob = env.dist.cdf(t_r) ** n
    return RevenueReport(
        label="public",
        mechanism=PublicReserve(reserve=r),
        revenue=n * per_bidder + no_trade_prob * ts,
        trade_prob=1.0 - no_trade_prob,
        no_trade_term=no_trade_prob * ts,
        per_bidder_payment=per_bidder,
        param_summary=f"t_r={t_r:.6g} r={r:.6g}",
    )


def revenue_public_nested(env, params, t_r):
    """Same objective via direct nested quadrature (cross-check path)."""
    boundary = env.order_cdf(t_r) * reserve_for_threshold(t_r, params, env.upper)

    def expected_payment(t):
        return integrate(lambda s: payment_slope(env, params, s), t_r, t) + boundary

    per_bidder = integrate(lambda t: expected_payment(t) * env.dist.pdf(t), t_r, env.upper)
    return env.n_bidders * per_bidder \
        + env.dist.cdf(t_r) ** env.n_bidders * env.seller_value


def attachment_boundary_payment(env, params, t_hat):
    """Boundary payment of the no-exclusion bound: the threshold type's full
    willingness to pay when she is attached like an interior type,

        (1 + eta) t F1(t) + eta (lam - 1) t F1(t)**2 / 2.
    """
    f1 = env.order_cdf(t_hat)
    return (1.0 + params.eta) * t_hat * f1 \
        + params.eta * (params.lam - 1.0) * t_hat * f1 ** 2 / 2.0


def revenue_upper_bound(env, params, t_hat):
    """Strict upper bound on public-reserve revenue: every type, including the
    marginal one, is priced as if exposed to the attachment effect."""
    if not 0.0 <= t_hat <= env.upper:
        raise DomainError("threshold type outside support")
    n, ts = env.n_bidders, env.seller_value
    p_hat = attachment_boundary_payment(env, params, t_hat)
    per_bidder = _survival_weighted_slope(env, params, t_hat, env.upper) \
        + (1.0 - env.dist.cdf(t_hat)) * p_hat
    no_trade_prob = env.dist.cdf(t_hat) ** n
    return RevenueReport(
        label="upper_bound",
        mechanism=None,
        revenue=n * per_bidder + no_trade_prob * ts,
        trade_prob=1.0 - no_trade_prob,
        no_trade_term=no_trade_prob * ts,
        per_bidder_payment=per_bidder,
        param_summary=f"t_hat={t_hat:.6g}",
    )


def revenue_secret(env, params, spec):
    """Revenue of the secret/random reserve scheme ``spec``.

    Per-bidder payments: with ``w(s) = s (1 - F(s))`` (so ``w(ub) = 0``),

        int_0^ub P(t) f dt = -(1+eta)     int_0^ub q    w' ds
                             -(eta(lam-1)/2) int_0^ub q**2 w' ds.

    No trade happens when the drawn threshold type beats every bidder type:
    probability ``E_F0[ F(t_r~)**N ]``.
    """
    T = spec.t_bar_r
    if T > env.upper:
        raise DomainError("largest threshold type exceeds the support")
    eta, lam, K = params.eta, params.lam, spec.K
    n, ts = env.n_bidders, env.seller_value
    dist = env.dist

    def wprime(s):
        return (1.0 - dist.cdf(s)) - s * dist.pdf(s)

    # [0, T] piece through u = F0(s), s = T u**(1/K): both integrands smooth in u.
    def low_q(u):
        s = T * u ** (1.0 / K)
        return (T / K) * u ** (1.0 / K) * env.order_cdf(s) * wprime(s)

    def low_q2(u):
        s = T * u ** (1.0 / K)
        return (T / K) * u ** (1.0 + 1.0 / K) * env.order_cdf(s) ** 2 * wprime(s)

    int_q = integrate(low_q, 0.0, 1.0) \
        + integrate(lambda s: env.order_cdf(s) * wprime(s), T, env.upper)
    int_q2 = integrate(low_q2, 0.0, 1.0) \
        + integrate(lambda s: env.order_cdf(s) ** 2 * wprime(s), T, env.upper)
    per_bidder = -(1.0 + eta) * int_q - 0.5 * eta * (lam - 1.0) * int_q2

    no_trade_prob = integrate(lambda u: dist.cdf(T * u ** (1.0 / K)) ** n, 0.0, 1.0)
    return RevenueReport(
        label="secret",
        mechanism=SecretRandomReserve(spec=spec),
        revenue=n * per_bidder + no_trade_prob * ts,
        trade_prob=1.0 - no_trade_prob,
        no_trade_term=no_trade_prob * ts,
        per_bidder_payment=per_bidder,
        param_summary=f"t_bar_r={T:.6g} K={K:g}",
    )


def revenue_tioli(env, params, spec):
    """Revenue of an auction followed by a TIOLI posted price.

    Auction stage: types above ``t_r`` pay as under a public reserve but with
    the larger boundary ``F1(t_r) * reserve``.  Posted stage: runs with
    probability ``nu`` when no bid met the reserve; sells at ``posted_price``
    whenever some type landed in ``[t_p, t_r)`` (one uniform-tie-break
    claimant).  The seller keeps the good otherwise.
    """
    t_r, t_p = spec.t_r, spec.t_p
    if not 0.0 <= t_p < t_r <= env.upper:
        raise DomainError("need 0 <= t_p < t_r <= upper")
    n, ts = env.n_bidders, env.seller_value
    F = env.dist.cdf
    auction_pb = _survival_weighted_slope(env, params, t_r, env.upper) \
        + (1.0 - F(t_r)) * env.order_cdf(t_r) * spec.reserve
    reserve_unmet = F(t_r) ** n
    some_acceptor = reserve_unmet - F(t_p) ** n
    posted_revenue = spec.nu * some_acceptor * spec.posted_price
    no_trade_prob = F(t_p) ** n + (1.0 - spec.nu) * some_acceptor
    per_bidder = auction_pb + posted_revenue / n
    return RevenueReport(
        label="tioli",
        mechanism=AuctionThenTioli(spec=spec),
        revenue=n * per_bidder + no_trade_prob * ts,
        trade_prob=1.0 - no_trade_prob,
        no_trade_term=no_trade_prob * ts,
        per_bidder_payment=per_bidder,
        param_summary=(f"t_r={t_r:.6g} r={spec.reserve:.6g} "
                       f"p={spec.posted_price:.6g} nu={spec.nu:.6g}"),
    )


@dataclass(frozen=True)
class MechanismComparison:
    """Mechanisms evaluated at their module-computed optima, best first."""

    reports: tuple
    deltas: tuple  # (label_a, label_b, revenue_a - revenue_b) for a above b

    def by_label(self, label):
        for rep in self.reports:
            if rep.label == label:
                return rep
        raise KeyError(label)


def compare_mechanisms(env, params, K=1e4, epsilon=None, include_upper_bound=True):
    """Evaluate no-reserve / optimal-public / TIOLI / secret side by side.

    The TIOLI row uses the dominating construction at the public optimum's
    threshold; the secret row uses the bound-optimal largest threshold type
    with concentration ``K``.  Ordering is by computed revenue, not asserted
    in advance.
    """
    from .optimizer import construct_secret_scheme, optimal_threshold_public, optimize_tioli

    rows = []
    rows.append(revenue_public(env, params, 0.0)._replace_label("no_reserve"))
    best_public = optimal_threshold_public(env, params)
    rows.append(revenue_public(env, params, best_public.threshold))
    tioli = optimize_tioli(env, params, epsilon=epsilon, t_r=best_public.threshold)
    rows.append(revenue_tioli(env, params, tioli.spec))
    secret = construct_secret_scheme(env, params, K)
    rows.append(revenue_secret(env, params, secret))
    if include_upper_bound:
        from .optimizer import upper_bound_threshold

        rows.append(revenue_upper_bound(env, params, upper_bound_threshold(env, params)))
    rows.sort(key=lambda rep: -rep.revenue)
    deltas = tuple(
        (rows[i].label, rows[i + 1].label, rows[i].revenue - rows[i + 1].revenue)
        for i in range(len(rows) - 1)
    )
    return MechanismComparison(reports=tuple(rows), deltas=deltas)
