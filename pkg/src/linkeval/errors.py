"""Exception types shared across the package.

Every error raised deliberately by this package derives from LinkEvalError,
so callers can catch one base class at the CLI boundary.
"""

from __future__ import annotations


class LinkEvalError(Exception):
    """Base class for all errors raised by this package."""


class InvalidSpan(LinkEvalError):
    """A character span violates its ordering or bounds constraints."""


class OverlappingGold(LinkEvalError):
    """Gold annotations overlap, which the scorer does not accept."""


class MalformedLine(LinkEvalError):
    """A line in an input file does not match the documented layout."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class DanglingITag(MalformedLine):
    """An I tag appears without a preceding B/I tag carrying the same entity."""


class EmptyCorpus(LinkEvalError):
    """A corpus file contains no documents."""


class PriorOutOfRange(LinkEvalError):
    """A candidate prior is outside [0, 1] or a mention's priors sum above 1."""


class DimensionMismatch(LinkEvalError):
    """Embedding vectors or weight matrices disagree on dimensionality."""


class EmptyTrie(LinkEvalError):
    """Constrained decoding was asked to decode against a trie with no entries."""


class LengthMismatch(LinkEvalError):
    """Two parallel sequences that must align have different lengths."""


class OutOfBounds(LinkEvalError):
    """A span lies outside the text segment that is supposed to contain it."""


class UnknownSubtoken(LinkEvalError):
    """A subtoken index has no entry in the subtoken-to-character map."""


class ZeroGold(LinkEvalError):
    """Error ratios are undefined for a result with zero gold annotations."""


class DatasetMismatch(LinkEvalError):
    """Two reports being compared were produced on different datasets."""


class MalformedRequest(LinkEvalError):
    """An annotate request body does not follow the wire format."""


class ProtocolViolation(LinkEvalError):
    """An annotator response does not follow the wire format."""


class AnnotatorUnreachable(LinkEvalError):
    """The remote annotator endpoint cannot be reached at all."""


class BindFailure(LinkEvalError):
    """The service could not bind its listen address."""


class IoFailure(LinkEvalError):
    """A report file could not be written."""


class UsageError(LinkEvalError):
    """Command line arguments are inconsistent or incomplete."""
