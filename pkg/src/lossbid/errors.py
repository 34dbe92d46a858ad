"""Semantic exception hierarchy for lossbid.

Public functions raise these instead of bare ValueError/RuntimeError so that
callers (and the CLI) can distinguish bad inputs from numerical trouble.
"""


class LossbidError(Exception):
    """Base error for this package."""


class DomainError(LossbidError, ValueError):
    """An argument is outside its mathematical domain (e.g. a type outside
    the value support, a probability outside [0, 1])."""


class RegularityError(LossbidError):
    """The type distribution fails the monotone-hazard-rate check required
    by an optimizer or equilibrium construction."""


class NumericsError(LossbidError, RuntimeError):
    """Quadrature or root finding failed to converge to tolerance."""


class InfeasibleSpecError(LossbidError):
    """A mechanism specification cannot be realized (e.g. the second-stage
    offer probability needed to hit a target allocation exceeds one)."""
