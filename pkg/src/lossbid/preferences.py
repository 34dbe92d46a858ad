"""Gain-loss preferences over the good dimension.

A bidder with type ``t`` who ends an auction with outcome ``(q, p)`` —
``q = 1`` if she got the item, paying ``p`` — and who held a (possibly
stochastic) reference point over the same outcomes, gets

    total utility = q (t - p) + mu(q t - r t),     mu(x) = eta x        if x >= 0
                                                         = eta lam x    if x <  0

with gain-loss weight ``eta >= 0`` and loss-aversion coefficient ``lam > 1``.
Money enters linearly (no gain-loss over payments), so expectations over
payments can always be collapsed to their mean, and only the win-probability
margin of a lottery matters for the psychological terms.

The marginal willingness to pay of a type-``t`` bidder who expects to win
with probability ``q`` is ``mwtp(t, q) = t (1 + eta lam q + eta (1 - q))``:
expected wins create an attachment that raises the value of winning more.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class LossParams:
    """Gain-loss weight ``eta >= 0`` and loss-aversion coefficient ``lam > 1``."""

    eta: float
    lam: float

    def __post_init__(self):
        if self.eta < 0.0:
            raise DomainError("eta must be nonnegative")
        if not self.lam > 1.0:
            raise DomainError("lam must be strictly greater than 1")

    @classmethod
    def risk_neutral(cls):
        """eta = 0 switches every formula to its risk-neutral analogue."""
        return cls(eta=0.0, lam=2.0)


@dataclass(frozen=True)
class OutcomeLottery:
    """Win probability plus a finite payment distribution conditional on winning.

    ``payments`` is a tuple of ``(weight, amount)`` atoms with weights summing
    to one.  Because money is linear, only ``expected_payment`` ever matters;
    the atom list is kept so lotteries read naturally in tests.
    """

    win_prob: float
    payments: tuple = ((1.0, 0.0),)

    def __post_init__(self):
        if not 0.0 <= self.win_prob <= 1.0:
            raise DomainError("win probability outside [0, 1]")
        w = np.array([a[0] for a in self.payments], dtype=float)
        if np.any(w < 0.0) or abs(w.sum() - 1.0) > 1e-12:
            raise DomainError("payment weights must be nonnegative and sum to 1")

    @property
    def expected_payment(self):
        """Unconditional expected payment (zero when losing)."""
        return self.win_prob * sum(w * p for w, p in self.payments)

    @classmethod
    def win_at_price(cls, q, price):
        return cls(win_prob=float(q), payments=((1.0, float(price)),))

    @classmethod
    def never_win(cls):
        return cls(win_prob=0.0)


def gain_loss(x, params):
    """Piecewise-linear psychological payoff, kinked at zero."""
    x = np.asarray(x, dtype=float)
    out = np.where(x >= 0.0, params.eta * x, params.eta * params.lam * x)
    return out if out.ndim else float(out)


def total_utility(outcome, ref, t, params):
    """Utility of a realized ``(q, p)`` against a deterministic reference ``ref``.

    ``q`` and ``ref`` are binary: did she get the good, did she expect to.
    """
    q, p = outcome
    if q not in (0, 1) or ref not in (0, 1):
        raise DomainError("outcome and reference must be binary")
    return q * (t - p) + gain_loss((q - ref) * t, params)


def interim_expected_utility(outcome_lottery, reference_lottery, t, params):
    """Expected utility of lottery ``G`` evaluated against reference lottery ``H``.

    Double expectation of :func:`total_utility`; with linear money this
    reduces to

        qG t - E[payment]  +  eta (1 - qH) qG t  -  eta lam qH (1 - qG) t.
    """
    qg = outcome_lottery.win_prob
    qh = reference_lottery.win_prob
    material = qg * t - outcome_lottery.expected_payment
    psych = params.eta * (1.0 - qh) * qg * t - params.eta * params.lam * qh * (1.0 - qg) * t
    return material + psych


def mwtp(t, q, params):
    """Marginal willingness to pay for extra win probability: ``t (1 + eta lam q + eta (1 - q))``."""
    t = np.asarray(t, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any((q < 0.0) | (q > 1.0)):
        raise DomainError("win probability outside [0, 1]")
    out = t * (1.0 + params.eta * params.lam * q + params.eta * (1.0 - q))
    return out if out.ndim else float(out)


def mimic_payoff(t_mimic, t_true, bid_fn, q_fn, params):
    """Expected utility of a type-``t_true`` bidder submitting type-``t_mimic``'s bid.

    The reference point stays at her own equilibrium outcome (win with
    probability ``q_fn(t_true)``), the deviation only changes the outcome
    lottery:

        q~ (t - b~)  -  eta lam (1 - q~) q t  +  eta (1 - q) q~ t

    with ``q~ = q_fn(t_mimic)`` and ``b~ = bid_fn(t_mimic)``.
    """
    q_dev = q_fn(t_mimic)
    q_ref = q_fn(t_true)
    b = bid_fn(t_mimic)
    return (
        q_dev * (t_true - b)
        - params.eta * params.lam * (1.0 - q_dev) * q_ref * t_true
        + params.eta * (1.0 - q_ref) * q_dev * t_true
    )
