"""Optimal threshold types and reserve prices across mechanisms.

The seller's profit under a public reserve with threshold type ``t_r`` is

    N * int_{t_r}^{ub} F1(t) beta(t) f(t) dt + F(t_r)**N * tS,

and its derivative is proportional (with positive factor) to the *negative*
of

    G(t_r) = V(t_r) - tS / (1 + eta)
             + [eta (lam - 1) / (1 + eta)] * (1 - F) / f * f1(t_r) * t_r,

so profit rises while ``G <= 0`` and interior optima solve ``G = 0``.  The
last term is the attachment the seller forgoes in the marginal type when she
excludes one more type; it is what pushes the optimal threshold *below* the
risk-neutral one (which solves ``V = tS``).  All first-order conditions here
are analytic; direct revenue scans are used only as cross-checks in tests.

Root finding is bracketed (Brent: bisection safeguarded by secant steps) at
tolerance 1e-10 in type units.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._numerics import bracketed_root, chebyshev_nodes
from .distributions import AuctionEnv
from .equilibrium import (
    SecretReserveSpec,
    TioliSpec,
    _require_regular,
    reserve_for_threshold,
    tioli_alpha,
    tioli_pricing,
)
from .errors import DomainError, InfeasibleSpecError
from .preferences import LossParams


@dataclass(frozen=True)
class ReserveSolution:
    """Optimal public-reserve solution."""

    threshold: float
    reserve: float
    is_corner: bool
    foc_residual: float
    revenue: float


def optimal_threshold_risk_neutral(env):
    """Threshold equating the virtual value with the seller's value."""
    _require_regular(env)
    return env.risk_neutral_threshold()


def public_reserve_foc(env, params, t):
    """Marginal condition ``G(t)`` (see module docstring); profit increases in
    the threshold exactly while ``G(t) <= 0``."""
    return _foc_real_n(env.dist, params, env.seller_value, env.n_bidders, t)


def _foc_real_n(dist, params, seller_value, n, t):
    # n may be real: F1 = F**(n-1) extends the order statistic analytically.
    t = np.asarray(t, dtype=float)
    F = dist.cdf(t)
    f = dist.pdf(t)
    f1 = (n - 1.0) * F ** (n - 2.0) * f
    c = params.eta * (params.lam - 1.0) / (1.0 + params.eta)
    out = (dist.virtual_value(t) - seller_value / (1.0 + params.eta)
           + c * (1.0 - F) / f * f1 * t)
    return out if out.ndim else float(out)


def _interior_roots(g, upper, n_scan=512):
    """All sign-change roots of ``g`` on (0, upper)."""
    grid = chebyshev_nodes(0.0, upper, n_scan)
    grid[0] = 1e-10 * upper
    grid[-1] = upper * (1.0 - 1e-12)
    vals = np.atleast_1d(g(grid))
    roots = []
    for i in range(len(grid) - 1):
        if vals[i] == 0.0:
            roots.append(grid[i])
        elif np.sign(vals[i]) != np.sign(vals[i + 1]):
            roots.append(bracketed_root(g, grid[i], grid[i + 1]))
    return roots


def _threshold_for_real_n(dist, params, seller_value, n):
    """Interior FOC root for (possibly non-integer) bidder count ``n``."""
    g = lambda t: _foc_real_n(dist, params, seller_value, n, t)
    roots = _interior_roots(g, dist.upper)
    if not roots:
        return 0.0
    return min(roots) if len(roots) == 1 else None  # ambiguity resolved by caller


def optimal_threshold_public(env, params):
    """Revenue-maximizing threshold type under a deterministic public reserve.

    Scans the analytic FOC for all interior roots, then compares revenue at
    ``{0, roots..., upper}`` directly (guarding non-uniqueness), breaking
    exact ties toward the smaller threshold (less exclusion).
    """
    from .revenue import revenue_public  # local import: revenue builds on equilibrium only

    _require_regular(env)
    g = lambda t: public_reserve_foc(env, params, t)
    candidates = [0.0] + _interior_roots(g, env.upper) + [env.upper]
    revenues = [revenue_public(env, params, t).revenue for t in candidates]
    best = int(np.argmax(revenues))  # exact ties resolve to the smaller threshold
    t_star = candidates[best]
    is_corner = t_star == 0.0
    residual = 0.0 if (is_corner or t_star == env.upper) else float(g(t_star))
    return ReserveSolution(
        threshold=float(t_star),
        reserve=reserve_for_threshold(t_star, params, env.upper),
        is_corner=is_corner,
        foc_residual=residual,
        revenue=float(revenues[best]),
    )


@dataclass(frozen=True)
class ExclusionReport:
    """How the optimal threshold moves with the number of bidders.

    ``condition_value = ln F(t_r*) + 1/(N-1)``: the threshold is locally
    *increasing* in N exactly when this is negative (it is the N-derivative
    of ``ln f1(t_r*)``; a thinner order-statistic density at the margin makes
    exclusion cheaper).  ``local_slope`` is the implicit-function derivative
    estimated with a small step in a continuous bidder count, whose sign
    provably matches the condition; ``unit_step`` is the coarse
    ``t_r*(N+1) - t_r*(N)`` difference, which can disagree when the condition
    changes sign between N and N+1.
    """

    n: int
    threshold: float
    threshold_next: float
    condition_value: float
    condition_holds: bool      # ln F(t_r*) < -1/(N-1): threshold locally increasing
    unit_step: float
    unit_step_sign: int
    local_slope: float
    local_slope_sign: int
    agrees_local: bool
    agrees_unit_step: bool
    is_corner: bool


def exclusion_comparative_static(env, params, dn=1e-3):
    """Evaluate the exclusion comparative static at ``env.n_bidders``."""
    _require_regular(env)
    sol = optimal_threshold_public(env, params)
    if sol.is_corner:
        # a corner stays a corner nearby: weakly increasing, trivially
        return ExclusionReport(env.n_bidders, 0.0, 0.0, np.nan, True,
                               0.0, 0, 0.0, 0, True, True, True)
    dist, ts, n = env.dist, env.seller_value, env.n_bidders
    t_now = sol.threshold
    env_next = AuctionEnv(dist, n + 1, ts)
    t_next = optimal_threshold_public(env_next, params).threshold
    cond_val = float(np.log(dist.cdf(t_now)) + 1.0 / (n - 1.0))
    cond_holds = cond_val < 0.0

    t_lo = _threshold_for_real_n(dist, params, ts, n - dn)
    t_hi = _threshold_for_real_n(dist, params, ts, n + dn)
    if t_lo is None or t_hi is None:
        local_slope = np.nan
    else:
        local_slope = (t_hi - t_lo) / (2.0 * dn)

    unit_step = t_next - t_now
    unit_sign = int(np.sign(unit_step))
    local_sign = int(np.sign(local_slope)) if np.isfinite(local_slope) else 0
    return ExclusionReport(
        n=n, threshold=t_now, threshold_next=t_next,
        condition_value=cond_val, condition_holds=cond_holds,
        unit_step=float(unit_step), unit_step_sign=unit_sign,
        local_slope=float(local_slope), local_slope_sign=local_sign,
        agrees_local=(local_sign > 0) == cond_holds,
        agrees_unit_step=(unit_sign > 0) == cond_holds,
        is_corner=False,
    )


def upper_bound_threshold(env, params):
    """Optimal threshold of the no-exclusion payment bound: solves

        V(t) = tS / (1 + eta + eta (lam - 1) F1(t) / 2),

    which collapses to ``V = tS`` (the risk-neutral threshold) when tS = 0
    and approaches ``V = tS / (1 + eta)`` as N grows.
    """
    _require_regular(env)
    eta, lam = params.eta, params.lam
    ts = env.seller_value

    def g(t):
        mult = 1.0 + eta + eta * (lam - 1.0) * env.order_cdf(t) / 2.0
        return env.dist.virtual_value(t) * mult - ts

    lo = 1e-12 * env.upper
    if g(lo) >= 0.0:
        return lo
    return bracketed_root(g, lo, env.upper)


def construct_secret_scheme(env, params, K):
    """Secret-reserve scheme with the bound-optimal largest threshold type and
    power-law concentration ``K``."""
    if not K > 0.0:
        raise DomainError("K must be positive")
    return SecretReserveSpec(t_bar_r=upper_bound_threshold(env, params), K=float(K))


@dataclass(frozen=True)
class TioliOptimum:
    """A TIOLI construction dominating the public reserve at the same threshold."""

    spec: TioliSpec
    revenue: float
    public_revenue: float
    improvement: float
    note: Optional[str] = None


def optimize_tioli(env, params, epsilon=None, t_r=None):
    """Dominating TIOLI construction: posted-price threshold just below the
    auction threshold (``t_p = t_r - epsilon``) and offer probability ``nu``
    chosen so the accepting types win with multiplier ``alpha = 1/2``.

    This is a *dominating* spec, not a claimed global optimum over
    ``(t_r, t_p, nu)``.  Raises :class:`InfeasibleSpecError` when hitting
    ``alpha = 1/2`` would need ``nu > 1``.
    """
    from .revenue import revenue_public, revenue_tioli

    _require_regular(env)
    if epsilon is None:
        epsilon = 1e-3 * env.upper
    if t_r is None:
        t_r = optimal_threshold_public(env, params).threshold
    if not epsilon > 0.0:
        raise DomainError("epsilon must be positive")
    t_p = t_r - epsilon
    if t_p <= 0.0:
        raise DomainError(f"epsilon={epsilon} too large: t_p = t_r - epsilon <= 0")

    alpha_target = 0.5
    per_unit_nu = tioli_alpha(1.0, t_p, t_r, env)
    nu = alpha_target / per_unit_nu
    if nu > 1.0:
        raise InfeasibleSpecError(
            f"alpha = 1/2 needs nu = {nu:.4f} > 1 at epsilon = {epsilon}"
        )
    r, p = tioli_pricing(t_r, t_p, alpha_target, env, params)
    spec = TioliSpec(t_r=t_r, t_p=t_p, nu=nu, alpha=alpha_target,
                     reserve=r, posted_price=p)
    rev = revenue_tioli(env, params, spec).revenue
    rev_pub = revenue_public(env, params, t_r).revenue
    note = None
    if rev <= rev_pub:
        note = ("no improvement under risk neutrality" if params.eta == 0.0
                else "no improvement at this configuration")
    return TioliOptimum(spec=spec, revenue=float(rev), public_revenue=float(rev_pub),
                        improvement=float(rev - rev_pub), note=note)
