"""Shared quadrature / root-finding helpers.

All payment and revenue integrals in this package go through :func:`integrate`
(adaptive, absolute tolerance 1e-10 and relative 1e-8) so that tolerance policy
lives in one place.  Bid curves are tabulated on Chebyshev-spaced nodes and
integrated cumulatively with a fixed Gauss-Legendre rule per node interval,
which is exact to machine precision for the smooth integrands that arise here.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy import integrate as _sciint
from scipy import optimize as _sciopt

from .errors import NumericsError

QUAD_ABS_TOL = 1e-10
QUAD_REL_TOL = 1e-8
ROOT_TOL = 1e-10

# Nodes/weights for the per-interval cumulative rule.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)


def integrate(f, a, b, points=None):
    """Adaptive quadrature of ``f`` over ``[a, b]``.

    ``points`` marks interior breakpoints (kinks) the adaptive scheme should
    honor.  Raises :class:`NumericsError` if the estimated error exceeds the
    requested tolerance.
    """
    if b <= a:
        return 0.0
    pts = None
    if points is not None:
        pts = [p for p in points if a < p < b]
        pts = pts or None
    with warnings.catch_warnings():
        warnings.simplefilter("error", _sciint.IntegrationWarning)
        try:
            val, err = _sciint.quad(
                f, a, b, points=pts, limit=200,
                epsabs=QUAD_ABS_TOL, epsrel=QUAD_REL_TOL,
            )
        except _sciint.IntegrationWarning as exc:  # pragma: no cover - rare
            raise NumericsError(f"quadrature did not converge on [{a}, {b}]: {exc}") from exc
    if err > max(QUAD_ABS_TOL, QUAD_REL_TOL * abs(val)) * 50:
        raise NumericsError(
            f"quadrature error estimate {err:.2e} too large on [{a}, {b}]"
        )
    return val


def cumulative_integral(f, nodes):
    """Cumulative integral of a smooth vectorized ``f`` along ``nodes``.

    Returns ``F`` with ``F[i] = int_{nodes[0]}^{nodes[i]} f``, using a 12-point
    Gauss-Legendre rule on each interval.
    """
    nodes = np.asarray(nodes, dtype=float)
    a, b = nodes[:-1], nodes[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    # shape (n_intervals, n_gl)
    x = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    vals = f(x.ravel()).reshape(x.shape)
    pieces = half * (vals @ _GL_WEIGHTS)
    out = np.empty(nodes.shape)
    out[0] = 0.0
    np.cumsum(pieces, out=out[1:])
    return out


def chebyshev_nodes(a, b, n):
    """``n`` Chebyshev points of the second kind on ``[a, b]``, endpoints included."""
    if n < 2:
        raise ValueError("need at least two nodes")
    k = np.arange(n)
    x = 0.5 * (1.0 - np.cos(np.pi * k / (n - 1)))
    return a + (b - a) * x


def bracketed_root(f, lo, hi, tol=ROOT_TOL):
    """Root of ``f`` on ``[lo, hi]``; the bracket must straddle a sign change.

    Brent's method: bisection safeguarded by secant/inverse-quadratic steps.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise NumericsError(
            f"no sign change on bracket [{lo}, {hi}]: f={flo:.3e}, {fhi:.3e}"
        )
    return _sciopt.brentq(f, lo, hi, xtol=tol, rtol=8.881784197001252e-16)
