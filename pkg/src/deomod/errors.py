"""Exception types shared across the package."""


class DeomodError(Exception):
    """Base class for all package errors."""


class IngestionError(DeomodError):
    """Unusable document: no extractable provisions, undecodable bytes."""


class ConfigurationError(DeomodError):
    """Missing or inconsistent configuration (oracle gaps, bad mappings)."""


class ParseError(DeomodError):
    """Malformed interchange input. Carries a line number when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class StructuralError(DeomodError):
    """Well-formed input with an invalid structure (cycles, bad heads)."""


class AlignmentError(DeomodError):
    """Token/character alignment failure; carries the divergence offset."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"offset {offset}: {message}"
        super().__init__(message)
        self.offset = offset


class ValidationError(DeomodError):
    """Domain-invariant violation (bad spans, bad tags, bad labels)."""


class UsageError(DeomodError):
    """Caller error: mismatched lengths, unknown names, bad arguments."""


class InputMissingError(DeomodError):
    """A pipeline stage was invoked before its input artifact exists."""
