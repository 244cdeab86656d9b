"""Shared exception types."""

from __future__ import annotations


class QuirkprintError(Exception):
    """Base class for all toolkit errors."""


class CorpusError(QuirkprintError):
    """Malformed corpus file or corpus invariant violation.

    ``line`` is the 1-based line number in the source file when known.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SignatureError(QuirkprintError):
    """Invalid signature or signature-pair operation."""


class AttributeMismatchError(SignatureError):
    """Two signatures do not share the same ordered attribute list."""


class ZeroOverlapError(SignatureError):
    """All positions are NA in at least one of the two signatures.

    Such pairs are incomparable; distance 0 would falsely imply identity.
    """


class EmptyDatasetError(QuirkprintError):
    """Operation requires a non-empty dataset."""


class StoreError(QuirkprintError):
    """Malformed signature/profile file.

    ``row`` is the 1-based data-row number (header excluded) when known.
    """

    def __init__(self, message: str, row: int | None = None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class TreeFormatError(QuirkprintError):
    """Malformed serialized decision tree."""


class MissingAttributeError(QuirkprintError):
    """A signature lacks an attribute the decision tree tests."""


class ProtocolError(QuirkprintError):
    """The test-driver service violated the wire protocol."""
