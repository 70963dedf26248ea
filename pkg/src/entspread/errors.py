"""Exception hierarchy shared by every module of the toolkit."""


class SpreadError(Exception):
    """Base class for all toolkit errors."""


class DomainError(SpreadError, ValueError):
    """A numeric argument lies outside the domain of the quantity."""


class NormalizationError(SpreadError, ValueError):
    """A state or spectrum does not have unit norm / unit weight."""


class SizeError(SpreadError, ValueError):
    """A dimension, class count or grid exceeds a configured cap."""


class ShapeError(SpreadError, ValueError):
    """Array or register shapes do not line up."""


class ValidityError(SpreadError, ValueError):
    """A matrix fails unitarity, trace preservation or positivity."""


class PreconditionError(SpreadError, RuntimeError):
    """A protocol step was requested on a session that cannot support it."""


class UnknownResourceError(SpreadError, KeyError):
    """Lookup of a named resource, state, gate or channel failed."""

    def __str__(self):
        return str(self.args[0]) if self.args else "unknown resource"


class CleanViolationError(SpreadError):
    """Attempt to discard a register that is neither |0> nor a delivered message."""

    def __init__(self, register, trace_distance):
        self.register = register
        self.trace_distance = float(trace_distance)
        super().__init__(
            f"register {register!r} is not in |0> (trace distance {self.trace_distance:.3g}) "
            "and is not a delivered classical message"
        )
