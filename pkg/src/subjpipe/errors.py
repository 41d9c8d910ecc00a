"""Exception hierarchy shared across the pipeline."""


class SubjPipeError(Exception):
    """Base class for all pipeline errors."""


class ParseError(SubjPipeError):
    """Malformed input file; carries a 1-based line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(SubjPipeError):
    """Well-formed input violating a content rule (bad label, duplicate id, ...)."""


class FormatError(SubjPipeError):
    """Binary container with a wrong magic or version."""


class TruncationError(SubjPipeError):
    """Binary container shorter than its header declares."""


class DomainError(SubjPipeError):
    """Operation called outside its domain (empty dataset, dim mismatch, ...)."""


class AlignmentError(SubjPipeError):
    """Dataset id with no matching embedding row."""


class TrainingError(SubjPipeError):
    """Optimization diverged (non-finite loss)."""
