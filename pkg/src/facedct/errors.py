"""Shared exception hierarchy.

The CLI maps these onto stable exit codes: ValidationError -> 1,
DataError -> 2, anything else -> 3.
"""


class FacedctError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(FacedctError):
    """Bad configuration or arguments supplied by the caller."""


class DataError(FacedctError):
    """Problem with dataset content, file payloads, or their consistency."""


class MismatchError(DataError):
    """Feature dimension or channel disagreement between pipeline stages."""
