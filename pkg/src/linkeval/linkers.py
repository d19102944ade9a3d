"""Reference linkers at desk scale.

Three self-contained linking strategies share the same shape: plain text
in, a list of non-overlapping annotations out.

* link_prior_argmax enumerates token spans, looks up candidates for each
  surface and keeps the highest-prior entity.
* link_coherence_rerank re-scores the top candidates of each span with
  embedding similarity plus a context coherence term.
* link_token_merge builds per-token predictions from candidate priors and
  merges adjacent tokens that agree.

constrained_beam_decode is the building block for generative linkers: a
beam search over an entity trie driven by an injected scoring callback, so
the output is always a known entity id.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, Callable, Iterable, Mapping, Sequence

import numpy as np

from .adapters import tokenize
from .candidates import CandidateMode, CandidatePolicy, EntityTrie, candidates_for
from .errors import DimensionMismatch, EmptyTrie, LengthMismatch, MalformedLine
from .model import Annotation, EntityId, Span, TokenSpan, normalize_annotations

Tokenizer = Callable[[str], list[TokenSpan]]
ScoreNext = Callable[[str, "str | None"], float]

DEFAULT_MAX_SPAN_TOKENS = 5
DEFAULT_TOP_P = 30
DEFAULT_CONTEXT_WINDOW = 25


@dataclass(frozen=True)
class EmbeddingTable:
    """Fixed word and entity vectors, all with one shared dimension."""

    dimension: int
    vectors: Mapping[str, np.ndarray]

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise DimensionMismatch(f"dimension must be >= 1, got {self.dimension}")
        for key, vec in self.vectors.items():
            if vec.shape != (self.dimension,):
                raise DimensionMismatch(f"vector {key!r} has shape {vec.shape}, expected ({self.dimension},)")

    def vector(self, key: EntityId | str) -> np.ndarray | None:
        return self.vectors.get(key.id if isinstance(key, EntityId) else key)

    @classmethod
    def empty(cls, dimension: int = 1) -> "EmbeddingTable":
        return cls(dimension=dimension, vectors={})


def load_embeddings(data: bytes | str | IO[bytes]) -> EmbeddingTable:
    """Load ``key<TAB>v1 v2 ... vd`` lines into an embedding table."""
    if isinstance(data, str):
        text = data
    else:
        raw = data if isinstance(data, bytes) else data.read()
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedLine(f"input is not valid UTF-8: {exc}") from exc
    vectors: dict[str, np.ndarray] = {}
    dimension: int | None = None
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        key, sep, rest = line.partition("\t")
        if not sep or not key:
            raise MalformedLine("expected key<TAB>values", number)
        try:
            vec = np.asarray([float(x) for x in rest.split()], dtype=np.float64)
        except ValueError as exc:
            raise MalformedLine(f"non-numeric vector component: {exc}", number) from exc
        if vec.size == 0:
            raise MalformedLine("empty vector", number)
        if dimension is None:
            dimension = int(vec.size)
        elif vec.size != dimension:
            raise DimensionMismatch(f"line {number}: vector for {key!r} has {vec.size} components, expected {dimension}")
        vec.flags.writeable = False
        vectors[key] = vec
    if dimension is None:
        raise MalformedLine("no vectors in input")
    return EmbeddingTable(dimension=dimension, vectors=vectors)


@dataclass(frozen=True)
class CoherenceParams:
    """Weights for the context coherence score.

    ``bilinear`` is a square matrix applied inside a per-word quadratic
    form; ``word_weights`` scales each context word's contribution (words
    missing from the map contribute nothing). ``context_window`` is the
    number of tokens considered on each side of a span.
    """

    bilinear: np.ndarray
    word_weights: Mapping[str, float] = field(default_factory=dict)
    context_window: int = DEFAULT_CONTEXT_WINDOW

    def __post_init__(self) -> None:
        mat = np.asarray(self.bilinear, dtype=np.float64)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionMismatch(f"bilinear matrix must be square, got shape {mat.shape}")
        if self.context_window < 0:
            raise ValueError("context_window must be >= 0")
        object.__setattr__(self, "bilinear", mat)

    @classmethod
    def zeros(cls, dimension: int, context_window: int = DEFAULT_CONTEXT_WINDOW) -> "CoherenceParams":
        return cls(bilinear=np.zeros((dimension, dimension)), word_weights={}, context_window=context_window)


def coherence_score(
    entity: EntityId,
    context_tokens: Sequence[str],
    embeddings: EmbeddingTable,
    params: CoherenceParams,
) -> float:
    """Sum of weighted quadratic forms over context words with embeddings.

    Under this formula the value depends only on the context; the entity
    argument is accepted for interface compatibility with entity-conditioned
    scorers and left unused.
    """
    if params.bilinear.shape != (embeddings.dimension, embeddings.dimension):
        raise DimensionMismatch(
            f"bilinear matrix shape {params.bilinear.shape} does not match embedding dimension {embeddings.dimension}"
        )
    total = 0.0
    for word in context_tokens:
        vec = embeddings.vector(word)
        if vec is None:
            continue
        weight = params.word_weights.get(word, 0.0)
        if weight == 0.0:
            continue
        total += weight * float(vec @ params.bilinear @ vec)
    return total


def enumerate_token_windows(
    tokens: Sequence[TokenSpan], max_length: int = DEFAULT_MAX_SPAN_TOKENS
) -> list[tuple[Span, tuple[int, int]]]:
    """All contiguous token windows of 1..max_length tokens.

    Returns (character span, (first_token, last_token_exclusive)) pairs in
    (start, length) lexicographic order.
    """
    if max_length < 1:
        raise ValueError(f"max_length must be >= 1, got {max_length}")
    out: list[tuple[Span, tuple[int, int]]] = []
    total = len(tokens)
    for start in range(total):
        for length in range(1, min(max_length, total - start) + 1):
            first = tokens[start]
            last = tokens[start + length - 1]
            out.append((Span(first.span.begin, last.span.end), (start, start + length)))
    return out


def enumerate_spans(tokens: Sequence[TokenSpan], max_length: int = DEFAULT_MAX_SPAN_TOKENS) -> list[Span]:
    """Character spans of all token windows up to max_length tokens."""
    return [span for span, _ in enumerate_token_windows(tokens, max_length)]


def _resolve_overlaps(picked: Iterable[tuple[Span, EntityId]]) -> list[Annotation]:
    """Greedy overlap resolution: longer spans win, then earlier, then by id."""
    kept: list[tuple[Span, EntityId]] = []
    for span, entity in sorted(picked, key=lambda p: (-len(p[0]), p[0].begin, p[1].id)):
        if all(not span.overlaps(other) for other, _ in kept):
            kept.append((span, entity))
    return normalize_annotations(Annotation(span, entity) for span, entity in kept)


def _argmax_candidate(candidates: Sequence[tuple[EntityId, float]]) -> tuple[EntityId, float] | None:
    best: tuple[EntityId, float] | None = None
    for entity, score in candidates:
        if best is None or score > best[1] or (score == best[1] and entity.id < best[0].id):
            best = (entity, score)
    return best


def link_prior_argmax(
    doc_text: str,
    policy: CandidatePolicy,
    max_span_tokens: int = DEFAULT_MAX_SPAN_TOKENS,
    *,
    tokenizer: Tokenizer = tokenize,
) -> list[Annotation]:
    """Link by picking the highest-prior candidate for every token span.

    Spans with no candidates are ignored, as are spans whose best candidate
    is the None entity. Overlaps resolve greedily in favor of longer spans,
    then earlier ones.
    """
    tokens = tokenizer(doc_text)
    picked: list[tuple[Span, EntityId]] = []
    for span, _window in enumerate_token_windows(tokens, max_span_tokens):
        surface = doc_text[span.begin:span.end]
        best = _argmax_candidate(candidates_for(surface, policy).candidates)
        if best is None or best[0].is_none:
            continue
        picked.append((span, best[0]))
    return _resolve_overlaps(picked)


def score_candidates(
    mention_words: Sequence[str],
    context_words: Sequence[str],
    candidates: Sequence[tuple[EntityId, float]],
    embeddings: EmbeddingTable,
    params: CoherenceParams,
) -> list[tuple[EntityId, float]]:
    """Score every given candidate: prior + similarity + context coherence.

    The similarity term is the dot product between the mean vector of the
    mention words and the entity vector; either side missing contributes
    zero. Returns one (entity, score) pair per input candidate, in order.
    """
    mention_vecs = [v for v in (embeddings.vector(w) for w in mention_words) if v is not None]
    mention_vec = np.mean(mention_vecs, axis=0) if mention_vecs else None
    context_term = coherence_score(candidates[0][0], context_words, embeddings, params) if candidates else 0.0
    scored: list[tuple[EntityId, float]] = []
    for entity, prior in candidates:
        entity_vec = embeddings.vector(entity)
        similarity = float(mention_vec @ entity_vec) if mention_vec is not None and entity_vec is not None else 0.0
        scored.append((entity, prior + similarity + context_term))
    return scored


def link_coherence_rerank(
    doc_text: str,
    policy: CandidatePolicy,
    embeddings: EmbeddingTable,
    params: CoherenceParams,
    top_p: int = DEFAULT_TOP_P,
    max_span_tokens: int = DEFAULT_MAX_SPAN_TOKENS,
    *,
    tokenizer: Tokenizer = tokenize,
) -> list[Annotation]:
    """Link like link_prior_argmax but re-score the top candidates.

    Per span, only the top_p highest-prior candidates are scored. With all
    vectors absent and all word weights zero the scores collapse to the
    priors, and the output equals link_prior_argmax's.
    """
    if top_p < 1:
        raise ValueError(f"top_p must be >= 1, got {top_p}")
    tokens = tokenizer(doc_text)
    picked: list[tuple[Span, EntityId]] = []
    for span, (first, last) in enumerate_token_windows(tokens, max_span_tokens):
        surface = doc_text[span.begin:span.end]
        pool = candidates_for(surface, policy).candidates[:top_p]
        if not pool:
            continue
        window = params.context_window
        context = [t.surface for t in tokens[max(0, first - window):first]]
        context += [t.surface for t in tokens[last:last + window]]
        mention_words = [t.surface for t in tokens[first:last]]
        best = _argmax_candidate(score_candidates(mention_words, context, pool, embeddings, params))
        if best is None or best[0].is_none:
            continue
        picked.append((span, best[0]))
    return _resolve_overlaps(picked)


def constrained_beam_decode(score_next: ScoreNext, trie: EntityTrie, beam_width: int = 5) -> EntityId:
    """Beam-search an entity id, expanding only symbols the trie allows.

    ``score_next(prefix, symbol)`` scores appending one symbol; the symbol
    None closes the current prefix as a complete entity. Path scores are
    sums of step scores. The best-scoring completed entity wins, ties going
    to the lexicographically smallest id. With beam_width 1 this reduces to
    greedy decoding.
    """
    if len(trie) == 0:
        raise EmptyTrie("cannot decode against an empty trie")
    if beam_width < 1:
        raise ValueError(f"beam_width must be >= 1, got {beam_width}")
    active: list[tuple[str, float]] = [("", 0.0)]
    finished: list[tuple[str, float]] = []
    while active:
        # closing a prefix competes against continuing it; only the step's
        # top beam_width hypotheses survive, finished or not
        expansions: list[tuple[str, float, bool]] = []
        for prefix, score in active:
            for symbol in trie.next_symbols(prefix):
                if symbol is None:
                    expansions.append((prefix, score + score_next(prefix, None), True))
                else:
                    expansions.append((prefix + symbol, score + score_next(prefix, symbol), False))
        expansions.sort(key=lambda e: (-e[1], e[0]))
        kept = expansions[:beam_width]
        active = [(prefix, score) for prefix, score, done in kept if not done]
        finished.extend((prefix, score) for prefix, score, done in kept if done)
    best_id, _ = min(finished, key=lambda p: (-p[1], p[0]))
    entity = trie.entity_at(best_id)
    assert entity is not None
    return entity


@dataclass(frozen=True)
class TokenPrediction:
    """Per-token entity hypotheses, strongest first. None means no link."""

    token_index: int
    top_k: tuple[tuple[EntityId | None, float], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "top_k", tuple(self.top_k))
        if not self.top_k:
            raise ValueError("top_k must contain at least one entry")
        scores = [s for _, s in self.top_k]
        if any(a < b for a, b in zip(scores, scores[1:])):
            raise ValueError("top_k must be sorted by descending score")


def merge_token_predictions(
    predictions: Sequence[TokenPrediction],
    tokens: Sequence[TokenSpan],
    policy: CandidatePolicy,
) -> list[Annotation]:
    """Turn per-token predictions into span annotations.

    Entity entries outside the token's policy candidates are dropped (a
    None entry always survives); the strongest surviving entry wins. Runs
    of adjacent tokens that agree on the same non-None entity become one
    annotation covering the whole run.
    """
    if len(predictions) != len(tokens):
        raise LengthMismatch(f"{len(predictions)} predictions but {len(tokens)} tokens")
    choices: list[EntityId | None] = []
    for prediction, token in zip(predictions, tokens):
        allowed = candidates_for(token.surface, policy).entities()
        choice: EntityId | None = None
        for entity, _score in prediction.top_k:
            if entity is None or entity.is_none:
                choice = None
                break
            if entity in allowed:
                choice = entity
                break
        choices.append(choice)

    annotations: list[Annotation] = []
    run_start: int | None = None
    run_entity: EntityId | None = None
    for i, choice in enumerate(choices):
        if run_entity is not None and (choice != run_entity):
            annotations.append(
                Annotation(Span(tokens[run_start].span.begin, tokens[i - 1].span.end), run_entity)
            )
            run_start, run_entity = None, None
        if choice is not None and run_entity is None:
            run_start, run_entity = i, choice
    if run_entity is not None and run_start is not None:
        annotations.append(
            Annotation(Span(tokens[run_start].span.begin, tokens[-1].span.end), run_entity)
        )
    return normalize_annotations(annotations)


def link_token_merge(
    doc_text: str,
    policy: CandidatePolicy,
    *,
    tokenizer: Tokenizer = tokenize,
) -> list[Annotation]:
    """Per-token linking driven by candidate priors.

    Each token's hypotheses are its own candidates scored by prior, plus a
    no-link entry carrying the leftover prior mass; merge_token_predictions
    then assembles runs of agreeing tokens.
    """
    tokens = tokenizer(doc_text)
    predictions: list[TokenPrediction] = []
    for token in tokens:
        cands = candidates_for(token.surface, policy).candidates
        entries: list[tuple[EntityId | None, float]] = [(e, p) for e, p in cands if not e.is_none]
        leftover = max(0.0, 1.0 - sum(p for _, p in entries))
        entries.append((None, leftover))
        entries.sort(key=lambda e: -e[1])
        predictions.append(TokenPrediction(token.token_index, tuple(entries)))
    return merge_token_predictions(predictions, tokens, policy)
