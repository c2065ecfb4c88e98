"""Exception hierarchy shared by all spiraldim modules."""


class SpiraldimError(Exception):
    """Base class for all spiraldim errors."""


class DomainError(SpiraldimError):
    """Evaluation requested outside the domain of a coefficient or curve."""


class PositivityError(SpiraldimError):
    """A quantity that must stay positive (damping, radius) became nonpositive."""


class FitDegenerateError(SpiraldimError):
    """Not enough data, or too narrow a window, for a meaningful fit."""


class OriginError(SpiraldimError):
    """Initial state at the origin: only the zero solution starts there."""


class StiffnessError(SpiraldimError):
    """Integrator step size underflowed; the problem is too stiff at these tolerances."""


class NotSpiralError(SpiraldimError):
    """Polar angle never became certified monotone over the trajectory span."""


class RangeError(SpiraldimError):
    """Angle arguments outside the span of a polar curve."""


class SpecError(SpiraldimError):
    """Invalid parameters for an analytic spiral generator."""


class ResolutionError(SpiraldimError):
    """Counting grid would exceed the cell budget; shrink the epsilon range."""


class TruncationError(SpiraldimError):
    """Curve too short for the requested epsilon range (tail not resolved)."""
