class OntofitError(Exception):
    """Base class for library errors."""


class UsageError(OntofitError, ValueError):
    pass


class ParseError(OntofitError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class PreconditionError(OntofitError, ValueError):
    pass


class DialectError(OntofitError, ValueError):
    pass


class ResourceLimit(OntofitError):
    """A configured size or search cap was exceeded."""


class PointConstraintError(OntofitError, ValueError):
    """A distinguished value outside the active domain must map to two targets."""


class InvariantViolation(OntofitError, AssertionError):
    """An internally constructed object failed its own verification."""
