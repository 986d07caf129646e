"""Exception types shared across the package."""


class PCSLabError(Exception):
    """Base class for all package errors."""


class DimensionError(PCSLabError, ValueError):
    """Operands disagree on qubit count or index range."""


class ResourceError(PCSLabError, RuntimeError):
    """A configured size or enumeration cap would be exceeded."""


class ValidationError(PCSLabError, ValueError):
    """Input violates a documented precondition."""


class UnsupportedCircuitError(PCSLabError, ValueError):
    """Circuit contains an operation the engine cannot simulate."""


class DomainError(PCSLabError, ValueError):
    """Argument lies outside the domain of a closed-form expression."""


class EstimationError(PCSLabError, RuntimeError):
    """No postselected samples were available to form an estimate."""
