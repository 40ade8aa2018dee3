"""Exception types shared across the toolkit."""


class AttackToolkitError(Exception):
    """Base class for all toolkit errors."""


class ZeroVector(AttackToolkitError):
    """A vector with (numerically) zero norm where a direction is required."""


class OutOfHemisphere(AttackToolkitError):
    """Semicircle query direction points away from the chord (psi > 90 deg)."""


class BudgetExhausted(AttackToolkitError):
    """The query counter has no budget left for another classifier call."""


class DegenerateEstimate(AttackToolkitError):
    """Sign-weighted probe sum cancelled to (numerically) zero."""


class InvalidConfig(AttackToolkitError):
    """A configuration value violates its contract."""


class InvalidInput(AttackToolkitError):
    """An operation precondition is violated by the caller."""


class NoAdversarialFound(AttackToolkitError):
    """A ray/expansion search ran out of range without hitting the adversarial region."""


class NoBoundaryInDirection(AttackToolkitError):
    """No parabola intersection exists along the requested direction."""


class NumericalFailure(AttackToolkitError):
    """A numeric solver could not produce a root within its residual tolerance."""


class EmptySet(AttackToolkitError):
    """A metric was requested over an empty trace collection."""


class InsufficientPoints(AttackToolkitError):
    """Too few curve points for the requested aggregate."""


class ProtocolError(AttackToolkitError):
    """Malformed or unexpected frame on the remote-oracle wire protocol."""
