"""Exception types shared across the package.

The CLI maps these onto exit codes: usage/config errors -> 1,
numerical failures -> 2, I/O and parse errors -> 3.
"""


class VqemetaError(Exception):
    """Base class for package errors."""


class SizeLimitError(VqemetaError, ValueError):
    """A qubit count or matrix dimension exceeds a configured cap."""


class ShapeMismatchError(VqemetaError, ValueError):
    """Operands disagree in qubit count, length, or matrix shape."""


class ValidationError(VqemetaError, ValueError):
    """Input violates a documented invariant (Hermiticity, symmetry, ...)."""


class CapacityError(VqemetaError, ValueError):
    """A feature or parameter vector exceeds the model's fixed maximum size."""


class ParseError(VqemetaError, ValueError):
    """A text input could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class ModelFormatError(VqemetaError, ValueError):
    """A serialized model file is truncated, corrupt, or has a wrong version."""


class NumericalFailure(VqemetaError, RuntimeError):
    """An optimization produced a non-finite energy or gradient.

    Carries the partial run record collected up to the failure.
    """

    def __init__(self, message: str, record=None):
        self.record = record
        super().__init__(message)


class TrainingFailure(VqemetaError, RuntimeError):
    """Meta-training produced a non-finite loss; carries the epoch index."""

    def __init__(self, message: str, epoch: int | None = None):
        self.epoch = epoch
        super().__init__(message)
