"""
Custom exceptions for the phase retrieval toolkit.
"""


class PhaseRetrievalError(Exception):
    """Base exception for all toolkit errors."""
    pass


class ConfigurationError(PhaseRetrievalError):
    """Exception raised for invalid or missing configuration."""
    pass


class DimensionError(PhaseRetrievalError, ValueError):
    """Exception raised when grid shapes or geometry do not agree."""
    pass


class DomainError(PhaseRetrievalError, ValueError):
    """Exception raised when a value lies outside an operation's domain."""
    pass


class UnsupportedIndexError(PhaseRetrievalError, ValueError):
    """Exception raised for Zernike indices beyond the supported maximum."""
    pass


class IllPosedFitError(PhaseRetrievalError):
    """Exception raised when a least-squares fit has too few samples."""
    pass


class SamplingError(PhaseRetrievalError):
    """Exception raised when the Fresnel transfer function would alias."""
    pass


class DerivativeKindError(PhaseRetrievalError, TypeError):
    """Exception raised when a solver receives the wrong derivative kind."""
    pass


class EventStreamError(PhaseRetrievalError):
    """Base exception for event stream problems."""
    pass


class EventParseError(EventStreamError):
    """Exception raised for a malformed event line."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class EventBoundsError(EventStreamError):
    """Exception raised for event coordinates outside the sensor."""
    pass


class EventOrderError(EventStreamError):
    """Exception raised when timestamps or axial samples go backwards."""
    pass


class StorageError(PhaseRetrievalError):
    """Exception raised for artifact read/write errors."""
    pass
