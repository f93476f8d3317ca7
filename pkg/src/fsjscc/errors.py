"""Exception hierarchy shared by every module."""


class FsjsccError(Exception):
    """Base class for all library errors."""


class EmptyInputError(FsjsccError, ValueError):
    """A sequence is too short for the requested block length."""


class AlignmentError(FsjsccError, ValueError):
    """Sequences that must be aligned have different lengths."""


class ValidationError(FsjsccError, ValueError):
    """A table, PMF or spec violates its invariants."""


class InfeasibleError(FsjsccError, ValueError):
    """The requested operating point cannot be met by any admissible choice."""


class ResourceCapError(FsjsccError, RuntimeError):
    """An enumeration or alphabet would exceed the configured size cap."""
