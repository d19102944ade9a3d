"""Benchmark runner: feed a corpus through an annotator and score it.

Annotators implement one method, ``annotate(text, doc_id)``, returning raw
(begin, end, entity) triples. Two implementations ship here: an in-process
one wrapping an AnnotationPipeline, and an HTTP client speaking the wire
protocol against a running service. Both produce byte-identical reports
for the same linker, segmentation and corpus (runtime aside).

Protocol failures are contained per document: the offending document is
scored with zero predictions and noted in the report, and the run
continues. Only an unreachable endpoint aborts the run.
"""

from __future__ import annotations

import json
import time
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Protocol, Sequence

from .conll import Corpus
from .errors import AnnotatorUnreachable, ProtocolViolation
from .model import AnnotatedDocument, EntityId, normalize_annotations
from .scoring import (
    DocumentScore,
    ErrorBreakdown,
    EvaluationReport,
    MatchResult,
    combine_results,
    error_ratios,
    match_annotations,
    micro_prf,
)
from .service import AnnotateRequest, AnnotationPipeline, RawTriple, decode_response, encode_request, validate_triples

LINKER_CHOICES = ("prior_argmax", "coherence", "token_merge")
POLICY_CHOICES = ("dict", "full", "empty")


@dataclass(frozen=True)
class RunConfig:
    """Everything a benchmark run depends on besides the corpus itself."""

    dataset: str = "corpus"
    policy: str = "dict"
    linker: str = "prior_argmax"
    dict_path: str | None = None
    vocab_path: str | None = None
    embeddings_path: str | None = None
    max_span_tokens: int = 5
    max_tokens: int = 512
    top_p: int = 30
    beam_width: int = 5
    endpoint: str | None = None
    out_dir: str | None = None
    seed: int = 0
    parallel: int = 1

    def __post_init__(self) -> None:
        if self.policy not in POLICY_CHOICES:
            raise ValueError(f"policy must be one of {POLICY_CHOICES}, got {self.policy!r}")
        if self.linker not in LINKER_CHOICES:
            raise ValueError(f"linker must be one of {LINKER_CHOICES}, got {self.linker!r}")
        if self.parallel < 1:
            raise ValueError("parallel must be >= 1")


class Annotator(Protocol):
    def annotate(self, text: str, doc_id: str | None = None) -> Sequence[RawTriple]: ...


class InProcessAnnotator:
    """Runs the pipeline directly, no sockets involved."""

    def __init__(self, pipeline: AnnotationPipeline):
        self.pipeline = pipeline

    def annotate(self, text: str, doc_id: str | None = None) -> list[RawTriple]:
        return self.pipeline.annotate_triples(text)


class HttpAnnotator:
    """Speaks the wire protocol against a running annotate service."""

    def __init__(self, endpoint: str, timeout: float = 30.0):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout

    def annotate(self, text: str, doc_id: str | None = None) -> list[RawTriple]:
        body = encode_request(AnnotateRequest(text=text, doc_id=doc_id))
        request = urllib.request.Request(
            f"{self.endpoint}/annotate",
            data=body,
            headers={"Content-Type": "application/json; charset=utf-8"},
            method="POST",
        )
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as response:
                payload = response.read()
        except urllib.error.HTTPError as exc:
            raise ProtocolViolation(f"annotate returned HTTP {exc.code}") from exc
        except (urllib.error.URLError, ConnectionError, TimeoutError) as exc:
            raise AnnotatorUnreachable(f"cannot reach {self.endpoint}: {exc}") from exc
        return list(decode_response(payload).annotations)

    def health(self) -> dict:
        try:
            with urllib.request.urlopen(f"{self.endpoint}/health", timeout=self.timeout) as response:
                return json.loads(response.read().decode("utf-8"))
        except (urllib.error.URLError, ConnectionError, TimeoutError) as exc:
            raise AnnotatorUnreachable(f"cannot reach {self.endpoint}: {exc}") from exc


class PredictionFileAnnotator:
    """Replays predictions loaded from a file, keyed by document id."""

    def __init__(self, by_doc: Mapping[str, Sequence[RawTriple]]):
        self.by_doc = {k: list(v) for k, v in by_doc.items()}

    def annotate(self, text: str, doc_id: str | None = None) -> list[RawTriple]:
        if doc_id is None:
            return []
        return list(self.by_doc.get(doc_id, []))


def _score_document(
    doc: AnnotatedDocument,
    annotator: Annotator,
    vocabulary: frozenset[EntityId],
) -> tuple[MatchResult, DocumentScore]:
    protocol_error: str | None = None
    try:
        triples = annotator.annotate(doc.text, doc.doc_id)
        predictions = normalize_annotations(validate_triples(triples, doc.text))
    except ProtocolViolation as exc:
        protocol_error = str(exc)
        predictions = []
    result = match_annotations(doc.gold, predictions, vocabulary)
    return result, DocumentScore.from_result(doc.doc_id, result, protocol_error)


def derive_vocabulary(corpus: Corpus, extra: Sequence[EntityId] = ()) -> frozenset[EntityId]:
    """Fallback scoring vocabulary: every entity named by the gold side."""
    entities = {a.entity for d in corpus.documents for a in d.gold if not a.entity.is_none}
    entities.update(e for e in extra if not e.is_none)
    return frozenset(entities)


def run_benchmark(
    corpus: Corpus,
    annotator: Annotator,
    config: RunConfig,
    vocabulary: frozenset[EntityId] | None = None,
) -> EvaluationReport:
    """Annotate every document, score it, and aggregate micro metrics.

    Documents run sequentially unless config.parallel is above 1; either
    way results aggregate in corpus order, so the report is deterministic.
    """
    if vocabulary is None:
        vocabulary = derive_vocabulary(corpus)
    started = time.perf_counter()
    if config.parallel > 1:
        with ThreadPoolExecutor(max_workers=config.parallel) as pool:
            scored = list(pool.map(lambda d: _score_document(d, annotator, vocabulary), corpus.documents))
    else:
        scored = [_score_document(doc, annotator, vocabulary) for doc in corpus.documents]
    runtime_ms = int((time.perf_counter() - started) * 1000)

    results = [result for result, _ in scored]
    per_document = tuple(score for _, score in scored)
    merged = combine_results(results)
    precision, recall, f1 = micro_prf(merged)
    if merged.gold_count > 0:
        breakdown = error_ratios(merged)
    else:
        breakdown = ErrorBreakdown(0.0, 0.0, 0.0, 0.0)
    return EvaluationReport(
        dataset=config.dataset,
        micro_precision=precision,
        micro_recall=recall,
        micro_f1=f1,
        breakdown=breakdown,
        per_document=per_document,
        runtime_ms=runtime_ms,
    )


# re-exported for convenience in tests and the CLI
__all__ = [
    "Annotator",
    "HttpAnnotator",
    "InProcessAnnotator",
    "PredictionFileAnnotator",
    "RunConfig",
    "derive_vocabulary",
    "run_benchmark",
    "LINKER_CHOICES",
    "POLICY_CHOICES",
]
