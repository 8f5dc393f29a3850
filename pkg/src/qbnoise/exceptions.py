"""Exception hierarchy shared by all qbnoise modules."""


class QBNError(Exception):
    """Base class for every error raised by qbnoise."""


class CapacityError(QBNError, ValueError):
    """A requested mode count or matrix dimension exceeds the configured cap."""


class ModeRangeError(QBNError, IndexError):
    """A mode index lies outside ``0..n-1``."""


class ShapeError(QBNError, ValueError):
    """Operands have incompatible dimensions."""


class DomainError(QBNError, ValueError):
    """A numeric argument is outside its admissible range."""


class ConsistencyError(QBNError, RuntimeError):
    """An internal identity failed; this points at a bug, not at user input."""
