"""Exception types raised across the package."""


class DiffTSError(Exception):
    """Base class for all package errors."""


class ConfigurationError(DiffTSError, ValueError):
    """Invalid configuration values or inputs that make an operation meaningless."""


class TrainingError(DiffTSError, RuntimeError):
    """Raised when an optimisation loop produces a non-finite loss."""

    def __init__(self, message, step=None, phase=None):
        super().__init__(message)
        self.step = step
        self.phase = phase


class StateError(DiffTSError, RuntimeError):
    """An object is missing state required by the requested operation."""


class DegenerateError(DiffTSError, ValueError):
    """A distribution collapsed in a way that leaves the result undefined."""


class NumericalError(DiffTSError, ArithmeticError):
    """A matrix factorisation or similar numerical routine failed."""


class StructuralError(DiffTSError, ValueError):
    """A graph or super-arm structure cannot support the request."""


class IngestionError(DiffTSError, ValueError):
    """A data file is malformed."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class StageError(DiffTSError, RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage, message):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
