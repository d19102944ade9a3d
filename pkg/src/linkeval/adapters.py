"""Text adapters that bridge raw documents and span-based linkers.

These are the glue steps a black-box annotator needs around an arbitrary
input document: a deterministic word tokenizer with exact character
offsets, a length-bounded document splitter, re-assembly of per-segment
annotations into document coordinates, and conversion of subtoken indices
back to character spans.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .errors import InvalidSpan, LengthMismatch, OutOfBounds, UnknownSubtoken
from .model import Annotation, Span, TokenSpan, normalize_annotations

_PUNCT = frozenset(string.punctuation)
_SENTENCE_FINAL = frozenset(".!?")
_APOSTROPHES = ("'", "’")


def _split_contractions(word: str) -> list[int]:
    """Return cut positions inside a word, splitting at interior apostrophes.

    The negation suffix keeps its leading consonant ("don't" cuts before the
    "n"); any other interior apostrophe starts the new piece ("Japan's" cuts
    before the apostrophe).
    """
    cuts: list[int] = []
    last = 0
    for i in range(1, len(word) - 1):
        if word[i] not in _APOSTROPHES:
            continue
        cut = i - 1 if (word[i - 1] in "nN" and word[i + 1] in "tT") else i
        if cut > last:
            cuts.append(cut)
            last = cut
    return cuts


def tokenize(text: str) -> list[TokenSpan]:
    """Split text into word tokens with exact character offsets.

    Whitespace separates chunks; leading and trailing punctuation characters
    are detached one per token; contractions split at apostrophes. For every
    returned token, text[span.begin:span.end] == surface.
    """
    tokens: list[TokenSpan] = []

    def emit(begin: int, piece: str) -> None:
        tokens.append(TokenSpan(len(tokens), Span(begin, begin + len(piece)), piece))

    pos = 0
    length = len(text)
    while pos < length:
        if text[pos].isspace():
            pos += 1
            continue
        start = pos
        while pos < length and not text[pos].isspace():
            pos += 1
        chunk = text[start:pos]

        left = 0
        right = len(chunk)
        leading: list[int] = []
        trailing: list[int] = []
        while left < right and chunk[left] in _PUNCT:
            leading.append(left)
            left += 1
        while right > left and chunk[right - 1] in _PUNCT:
            trailing.append(right - 1)
            right -= 1
        for offset in leading:
            emit(start + offset, chunk[offset])
        core = chunk[left:right]
        if core:
            prev = 0
            for cut in _split_contractions(core):
                emit(start + left + prev, core[prev:cut])
                prev = cut
            emit(start + left + prev, core[prev:])
        for offset in reversed(trailing):
            emit(start + offset, chunk[offset])
    return tokens


@dataclass(frozen=True, slots=True)
class Segment:
    """A contiguous slice of a document handed to the linker in one call."""

    text: str
    char_offset: int
    token_range: tuple[int, int]


def split_document(text: str, max_tokens: int, tokenizer: Callable[[str], list[TokenSpan]] = tokenize) -> list[Segment]:
    """Split a document into segments of at most max_tokens tokens.

    A document that already fits yields exactly one segment identical to the
    input. Otherwise segments are cut greedily, preferring the last
    sentence-final punctuation token (. ! ?) inside the window and falling
    back to a hard cut at the window edge. Cuts never land inside a token.
    """
    if max_tokens < 1:
        raise ValueError(f"max_tokens must be >= 1, got {max_tokens}")
    tokens = tokenizer(text)
    if len(tokens) <= max_tokens:
        return [Segment(text=text, char_offset=0, token_range=(0, len(tokens)))]

    segments: list[Segment] = []
    start = 0
    total = len(tokens)
    while start < total:
        window_end = min(start + max_tokens, total)
        cut = window_end
        if window_end < total:
            for i in range(window_end - 1, start - 1, -1):
                if tokens[i].surface in _SENTENCE_FINAL:
                    cut = i + 1
                    break
        begin_char = tokens[start].span.begin
        end_char = tokens[cut - 1].span.end
        segments.append(Segment(text=text[begin_char:end_char], char_offset=begin_char, token_range=(start, cut)))
        start = cut
    return segments


def merge_segment_annotations(
    segments: Sequence[Segment],
    per_segment: Sequence[Sequence[Annotation]],
) -> list[Annotation]:
    """Map per-segment annotations back to document coordinates and normalize.

    The two sequences must be parallel. Each annotation is shifted by its
    segment's character offset; an annotation outside its segment's bounds
    is rejected.
    """
    if len(segments) != len(per_segment):
        raise LengthMismatch(f"{len(segments)} segments but {len(per_segment)} annotation lists")
    shifted: list[Annotation] = []
    for segment, annotations in zip(segments, per_segment):
        for ann in annotations:
            if ann.span.end > len(segment.text):
                raise OutOfBounds(
                    f"span ({ann.span.begin}, {ann.span.end}) exceeds segment length {len(segment.text)}"
                )
            shifted.append(Annotation(ann.span.shift(segment.char_offset), ann.entity))
    return normalize_annotations(shifted)


@dataclass(frozen=True)
class SubtokenMap:
    """Maps subtoken indices (e.g. wordpiece positions) to character spans."""

    entries: tuple[tuple[int, Span], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))
        last = -1
        for index, _span in self.entries:
            if index <= last:
                raise ValueError(f"subtoken indices must be strictly increasing, got {index} after {last}")
            last = index

    def span_of(self, index: int) -> Span:
        for i, span in self.entries:
            if i == index:
                return span
        raise UnknownSubtoken(f"no entry for subtoken index {index}")


def subtoken_to_char(
    subtoken_annotations: Sequence[tuple[int, int, object]],
    mapping: SubtokenMap | Mapping[int, Span],
) -> list[tuple[Span, object]]:
    """Convert (first_subtoken, last_subtoken, payload) triples to char spans.

    Subtoken indices are inclusive on both ends; the resulting span runs
    from the begin of the first subtoken to the end of the last one.
    """
    lookup: Mapping[int, Span]
    if isinstance(mapping, SubtokenMap):
        lookup = dict(mapping.entries)
    else:
        lookup = mapping
    out: list[tuple[Span, object]] = []
    for first, last, payload in subtoken_annotations:
        if first > last:
            raise InvalidSpan(f"subtoken range ({first}, {last}) is reversed")
        try:
            begin = lookup[first].begin
            end = lookup[last].end
        except KeyError as exc:
            raise UnknownSubtoken(f"no entry for subtoken index {exc.args[0]}") from exc
        out.append((Span(begin, end), payload))
    return out
