"""Candidate generation resources: alias dictionary, policies, entity trie.

Candidate lists are always ordered by descending prior with ties broken
lexicographically by entity id, so every consumer sees the same order no
matter how the resource file was arranged.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Mapping

from .errors import MalformedLine, PriorOutOfRange
from .model import NONE_ENTITY, EntityId, make_entity

_SUM_TOLERANCE = 1e-9

Candidate = tuple[EntityId, float]


def _rank(pairs: Iterable[Candidate]) -> tuple[Candidate, ...]:
    return tuple(sorted(pairs, key=lambda c: (-c[1], c[0].id)))


@dataclass(frozen=True)
class CandidateSet:
    """Ranked candidates for one mention surface."""

    mention: str
    candidates: tuple[Candidate, ...]

    def __len__(self) -> int:
        return len(self.candidates)

    def __iter__(self) -> Iterator[Candidate]:
        return iter(self.candidates)

    def entities(self) -> frozenset[EntityId]:
        return frozenset(e for e, _ in self.candidates)


@dataclass(frozen=True)
class AliasDictionary:
    """Mention surface -> ranked (entity, prior) lists.

    Per mention, priors each lie in [0, 1] and sum to at most 1 (plus a
    small float tolerance); any remaining mass is implicitly the chance
    that the mention links to nothing. Priors are never renormalized.
    """

    entries: Mapping[str, tuple[Candidate, ...]]
    lowercase_index: Mapping[str, tuple[Candidate, ...]] = field(repr=False, default_factory=dict)

    def __post_init__(self) -> None:
        entries = {m: _rank(cands) for m, cands in self.entries.items()}
        for mention, cands in entries.items():
            total = 0.0
            for entity, prior in cands:
                if not (0.0 <= prior <= 1.0):
                    raise PriorOutOfRange(f"{mention!r} -> {entity.id}: prior {prior} outside [0, 1]")
                total += prior
            if total > 1.0 + _SUM_TOLERANCE:
                raise PriorOutOfRange(f"{mention!r}: priors sum to {total}, above 1")
        lowered: dict[str, dict[EntityId, float]] = {}
        for mention, cands in entries.items():
            bucket = lowered.setdefault(mention.lower(), {})
            for entity, prior in cands:
                if prior > bucket.get(entity, -1.0):
                    bucket[entity] = prior
        object.__setattr__(self, "entries", entries)
        object.__setattr__(
            self,
            "lowercase_index",
            {m: _rank(bucket.items()) for m, bucket in lowered.items()},
        )

    @property
    def vocabulary(self) -> frozenset[EntityId]:
        return frozenset(e for cands in self.entries.values() for e, _ in cands)

    def lookup(self, mention: str) -> tuple[Candidate, ...]:
        """Exact surface match first, then a lowercase fallback."""
        hit = self.entries.get(mention)
        if hit is not None:
            return hit
        return self.lowercase_index.get(mention.lower(), ())

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, EntityId, float]]) -> "AliasDictionary":
        """Build a dictionary, keeping the highest prior per (mention, entity)."""
        grouped: dict[str, dict[EntityId, float]] = {}
        for mention, entity, prior in pairs:
            bucket = grouped.setdefault(mention, {})
            if prior > bucket.get(entity, -1.0):
                bucket[entity] = prior
        return cls(entries={m: tuple(bucket.items()) for m, bucket in grouped.items()})


def _iter_data_lines(data: bytes | str | IO[bytes]) -> Iterator[tuple[int, str]]:
    if isinstance(data, str):
        text = data
    else:
        raw = data if isinstance(data, bytes) else data.read()
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedLine(f"input is not valid UTF-8: {exc}") from exc
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield number, line.rstrip("\n\r")


def load_alias_dictionary(data: bytes | str | IO[bytes]) -> AliasDictionary:
    """Load a tab-separated ``mention<TAB>entity<TAB>prior`` file.

    Lines starting with ``#`` and blank lines are ignored. Duplicate
    (mention, entity) rows keep the maximum prior.
    """
    pairs: list[tuple[str, EntityId, float]] = []
    for number, line in _iter_data_lines(data):
        fields = line.split("\t")
        if len(fields) != 3:
            raise MalformedLine(f"expected 3 tab-separated fields, got {len(fields)}", number)
        mention, entity_id, prior_text = fields
        if not mention or not entity_id.strip():
            raise MalformedLine("mention and entity must be non-empty", number)
        try:
            prior = float(prior_text)
        except ValueError as exc:
            raise MalformedLine(f"prior {prior_text!r} is not a number", number) from exc
        if not (0.0 <= prior <= 1.0):
            raise PriorOutOfRange(f"line {number}: prior {prior} outside [0, 1]")
        pairs.append((mention, make_entity(entity_id.strip()), prior))
    return AliasDictionary.from_pairs(pairs)


def load_vocabulary(data: bytes | str | IO[bytes]) -> tuple[EntityId, ...]:
    """Load an entity vocabulary, one id per line.

    The reserved None entity is included exactly once whether or not the
    file lists it.
    """
    seen: set[EntityId] = set()
    ordered: list[EntityId] = []
    for number, line in _iter_data_lines(data):
        entity = make_entity(line.strip())
        if entity not in seen:
            seen.add(entity)
            ordered.append(entity)
    if NONE_ENTITY not in seen:
        ordered.append(NONE_ENTITY)
    return tuple(ordered)


class CandidateMode(enum.Enum):
    DICTIONARY = "dictionary"
    FULL_VOCABULARY = "full_vocabulary"
    EMPTY = "empty"


@dataclass(frozen=True)
class CandidatePolicy:
    """Selects how candidate sets are produced for a mention surface.

    DICTIONARY consults the alias dictionary. FULL_VOCABULARY returns every
    non-None vocabulary entity with a uniform prior regardless of the
    mention. EMPTY always returns no candidates.
    """

    mode: CandidateMode
    dictionary: AliasDictionary | None = None
    full_vocabulary: tuple[EntityId, ...] | None = None
    _uniform: tuple[Candidate, ...] = field(repr=False, compare=False, default=())

    def __post_init__(self) -> None:
        if self.mode is CandidateMode.DICTIONARY and self.dictionary is None:
            raise ValueError("dictionary mode requires an alias dictionary")
        if self.mode is CandidateMode.FULL_VOCABULARY:
            if not self.full_vocabulary:
                raise ValueError("full-vocabulary mode requires a vocabulary")
            linkable = sorted({e for e in self.full_vocabulary if not e.is_none}, key=lambda e: e.id)
            if not linkable:
                raise ValueError("vocabulary contains no linkable entities")
            uniform = 1.0 / len(linkable)
            object.__setattr__(self, "_uniform", tuple((e, uniform) for e in linkable))


def candidates_for(mention: str, policy: CandidatePolicy) -> CandidateSet:
    """Produce the ranked candidate set for a mention under a policy."""
    if policy.mode is CandidateMode.DICTIONARY:
        assert policy.dictionary is not None
        return CandidateSet(mention, policy.dictionary.lookup(mention))
    if policy.mode is CandidateMode.FULL_VOCABULARY:
        return CandidateSet(mention, policy._uniform)
    return CandidateSet(mention, ())


class _TrieNode:
    __slots__ = ("children", "entity")

    def __init__(self) -> None:
        self.children: dict[str, _TrieNode] = {}
        self.entity: EntityId | None = None


class EntityTrie:
    """Character-level trie over entity identifiers.

    Built once via build_trie and never mutated afterwards. The terminal
    marker in next_symbols is None.
    """

    def __init__(self) -> None:
        self._root = _TrieNode()
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def _insert(self, entity: EntityId) -> None:
        node = self._root
        for ch in entity.id:
            node = node.children.setdefault(ch, _TrieNode())
        if node.entity is None:
            self._size += 1
        node.entity = entity

    def _walk(self, prefix: str) -> _TrieNode | None:
        node = self._root
        for ch in prefix:
            node = node.children.get(ch)
            if node is None:
                return None
        return node

    def __contains__(self, item: EntityId | str) -> bool:
        key = item.id if isinstance(item, EntityId) else item
        node = self._walk(key)
        return node is not None and node.entity is not None

    def entity_at(self, prefix: str) -> EntityId | None:
        node = self._walk(prefix)
        return node.entity if node is not None else None

    def next_symbols(self, prefix: str) -> frozenset[str | None]:
        """Valid continuations of a prefix; None marks a complete entity."""
        node = self._walk(prefix)
        if node is None:
            return frozenset()
        symbols: set[str | None] = set(node.children)
        if node.entity is not None:
            symbols.add(None)
        return frozenset(symbols)


def build_trie(entities: Iterable[EntityId | str]) -> EntityTrie:
    """Build an entity trie from ids; duplicates collapse to one entry."""
    trie = EntityTrie()
    for item in entities:
        entity = item if isinstance(item, EntityId) else make_entity(item)
        trie._insert(entity)
    return trie
