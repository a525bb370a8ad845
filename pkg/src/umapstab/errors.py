"""Exception hierarchy shared by every module in the package."""


class UmapStabError(Exception):
    """Base class for all package errors."""


class StructuralError(UmapStabError, ValueError):
    """Malformed input: wrong shapes, unknown points, mismatched point sets."""


class DomainError(UmapStabError, ValueError):
    """Input outside the mathematical domain of an operation."""


class ParameterError(UmapStabError, ValueError):
    """A scalar parameter is out of range."""


class ResourceError(UmapStabError, RuntimeError):
    """A combinatorial size guard was exceeded."""


class FormatError(UmapStabError, ValueError):
    """An input file does not follow its declared format."""


class PreconditionError(UmapStabError, ValueError):
    """A theorem hypothesis failed; ``violations`` lists the offending items."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)
