"""Exception hierarchy.

Input and contract problems derive from :class:`ValidationError` (a
``ValueError``), runtime numerical breakdowns from :class:`NumericalError`
(a ``RuntimeError``).  The CLI maps these onto distinct exit statuses.
"""


class ValidationError(ValueError):
    """Malformed input, violated precondition, or unusable configuration."""


class ContractViolationError(ValidationError):
    """Arguments that are individually fine but mutually inconsistent."""


class InsufficientDataError(ValidationError):
    """Not enough data to produce the requested estimate or verdict."""


class UnsupportedConfigurationError(ValidationError):
    """A configuration the library deliberately refuses to guess at."""


class DegenerateFitError(ValidationError):
    """A fit was requested on data that cannot determine it."""


class KernelIndexError(ValidationError, IndexError):
    """Index outside the range on which a kernel is defined."""


class NumericalError(RuntimeError):
    """A numerical procedure failed beyond the configured escalation."""
