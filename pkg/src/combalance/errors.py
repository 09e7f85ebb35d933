"""Exception types raised across the package."""


class BalanceError(Exception):
    """Base class for all errors raised by this package."""


class VerticalBalanceViolation(BalanceError):
    """Contact forces do not carry the robot's weight."""


class DegenerateScale(BalanceError):
    """Hand takes (nearly) all of the weight, support scale collapses."""


class NonCoplanarFeet(BalanceError):
    """Foot corner points are not on the ground plane."""


class DegenerateHull(BalanceError):
    """Fewer than three non-collinear points, no polygon exists."""


class LayoutMismatch(BalanceError):
    """Declared decision-vector layout disagrees with the assembled blocks."""


class DimensionMismatch(BalanceError):
    """Array shapes do not match the declared problem dimensions."""


class NumericalBreakdown(BalanceError):
    """A factorization failed beyond recoverable regularization."""


class BalanceInfeasible(BalanceError):
    """No statically balanced wrench distribution exists for the setup."""


class ConfigInvalid(BalanceError):
    """Scenario configuration failed schema validation."""
