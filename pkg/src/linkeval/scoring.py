"""Strong-matching evaluation with a four-way error breakdown.

A prediction counts as correct only when both its span and its entity
match a gold annotation exactly. Every prediction that is not correct
falls into exactly one error category:

* incorrect entity: right span, wrong entity;
* incorrect mention: right entity, overlapping but non-identical span;
* over-generated: everything else.

Gold annotations that no prediction even overlaps are under-generated.
Both sides are first restricted to non-None entities inside the scoring
vocabulary, so out-of-KB material never influences the counts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DatasetMismatch, OverlappingGold, ZeroGold
from .model import Annotation, EntityId, filter_inkb, normalize_annotations


@dataclass(frozen=True)
class MatchResult:
    """Classified annotations for one document (or a merged set of them)."""

    true_positives: tuple[tuple[Annotation, Annotation], ...]
    incorrect_entity: tuple[Annotation, ...]
    incorrect_mention: tuple[Annotation, ...]
    over_generated: tuple[Annotation, ...]
    under_generated: tuple[Annotation, ...]
    gold_count: int
    pred_count: int

    def __post_init__(self) -> None:
        classified = (
            len(self.true_positives)
            + len(self.incorrect_entity)
            + len(self.incorrect_mention)
            + len(self.over_generated)
        )
        if classified != self.pred_count:
            raise ValueError(f"prediction categories sum to {classified}, expected {self.pred_count}")

    @property
    def tp_count(self) -> int:
        return len(self.true_positives)


def match_annotations(
    gold: Sequence[Annotation],
    predicted: Sequence[Annotation],
    vocabulary: frozenset[EntityId] | set[EntityId],
) -> MatchResult:
    """Classify predictions against gold annotations.

    Matching runs in five deterministic passes over (begin, end, entity)
    ordered annotations: exact matches first, then wrong-entity exact
    spans, then same-entity overlaps, then leftovers as over-generation;
    finally golds that no prediction overlaps are under-generated. Each
    gold matches at most one prediction exactly.
    """
    gold_sorted = normalize_annotations(gold)
    for prev, cur in zip(gold_sorted, gold_sorted[1:]):
        if prev.span.overlaps(cur.span):
            raise OverlappingGold(
                f"gold spans ({prev.span.begin}, {prev.span.end}) and ({cur.span.begin}, {cur.span.end}) overlap"
            )
    gold_inkb = filter_inkb(gold_sorted, vocabulary)
    pred_inkb = filter_inkb(normalize_annotations(predicted), vocabulary)

    matched_gold: set[Annotation] = set()
    pending: list[Annotation] = []
    true_positives: list[tuple[Annotation, Annotation]] = []

    # pass 1: exact span and entity
    gold_exact = {ann: ann for ann in gold_inkb}
    for pred in pred_inkb:
        hit = gold_exact.get(pred)
        if hit is not None and hit not in matched_gold:
            matched_gold.add(hit)
            true_positives.append((hit, pred))
        else:
            pending.append(pred)

    # pass 2: exact span, different entity
    by_span = {ann.span: ann for ann in gold_inkb}
    incorrect_entity: list[Annotation] = []
    still_pending: list[Annotation] = []
    for pred in pending:
        hit = by_span.get(pred.span)
        if hit is not None and hit not in matched_gold and hit.entity != pred.entity:
            incorrect_entity.append(pred)
        else:
            still_pending.append(pred)
    pending = still_pending

    # pass 3: same entity, overlapping but non-identical span
    incorrect_mention: list[Annotation] = []
    still_pending = []
    for pred in pending:
        if any(
            g not in matched_gold and g.entity == pred.entity and g.span.overlaps(pred.span)
            for g in gold_inkb
        ):
            incorrect_mention.append(pred)
        else:
            still_pending.append(pred)

    # pass 4: everything left over
    over_generated = still_pending

    # pass 5: golds that no prediction overlaps at all
    under_generated = [
        g
        for g in gold_inkb
        if g not in matched_gold and not any(g.span.overlaps(p.span) for p in pred_inkb)
    ]

    return MatchResult(
        true_positives=tuple(true_positives),
        incorrect_entity=tuple(incorrect_entity),
        incorrect_mention=tuple(incorrect_mention),
        over_generated=tuple(over_generated),
        under_generated=tuple(under_generated),
        gold_count=len(gold_inkb),
        pred_count=len(pred_inkb),
    )


def combine_results(results: Iterable[MatchResult]) -> MatchResult:
    """Concatenate per-document results into one corpus-level result."""
    tp: list[tuple[Annotation, Annotation]] = []
    ie: list[Annotation] = []
    im: list[Annotation] = []
    og: list[Annotation] = []
    ug: list[Annotation] = []
    gold_count = 0
    pred_count = 0
    for r in results:
        tp.extend(r.true_positives)
        ie.extend(r.incorrect_entity)
        im.extend(r.incorrect_mention)
        og.extend(r.over_generated)
        ug.extend(r.under_generated)
        gold_count += r.gold_count
        pred_count += r.pred_count
    return MatchResult(tuple(tp), tuple(ie), tuple(im), tuple(og), tuple(ug), gold_count, pred_count)


def micro_prf(results: Sequence[MatchResult] | MatchResult) -> tuple[float, float, float]:
    """Micro precision, recall and F1 over one or more match results.

    With zero predictions precision is 1.0, with zero golds recall is 1.0;
    F1 is 0.0 when precision + recall is zero.
    """
    if isinstance(results, MatchResult):
        results = [results]
    tp = sum(r.tp_count for r in results)
    pred = sum(r.pred_count for r in results)
    gold = sum(r.gold_count for r in results)
    precision = tp / pred if pred > 0 else 1.0
    recall = tp / gold if gold > 0 else 1.0
    f1 = (2 * precision * recall / (precision + recall)) if precision + recall > 0 else 0.0
    return precision, recall, f1


@dataclass(frozen=True)
class ErrorBreakdown:
    """The four error counts normalized by the gold annotation count."""

    over_generated: float
    under_generated: float
    incorrect_entity: float
    incorrect_mention: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.over_generated, self.under_generated, self.incorrect_entity, self.incorrect_mention)


def error_ratios(result: MatchResult) -> ErrorBreakdown:
    """Each error count divided by the gold count."""
    if result.gold_count <= 0:
        raise ZeroGold("error ratios are undefined without gold annotations")
    denom = result.gold_count
    return ErrorBreakdown(
        over_generated=len(result.over_generated) / denom,
        under_generated=len(result.under_generated) / denom,
        incorrect_entity=len(result.incorrect_entity) / denom,
        incorrect_mention=len(result.incorrect_mention) / denom,
    )


@dataclass(frozen=True)
class DocumentScore:
    """Per-document count summary, including any protocol failure note."""

    doc_id: str
    true_positives: int
    incorrect_entity: int
    incorrect_mention: int
    over_generated: int
    under_generated: int
    gold_count: int
    pred_count: int
    protocol_error: str | None = None

    @classmethod
    def from_result(cls, doc_id: str, result: MatchResult, protocol_error: str | None = None) -> "DocumentScore":
        return cls(
            doc_id=doc_id,
            true_positives=result.tp_count,
            incorrect_entity=len(result.incorrect_entity),
            incorrect_mention=len(result.incorrect_mention),
            over_generated=len(result.over_generated),
            under_generated=len(result.under_generated),
            gold_count=result.gold_count,
            pred_count=result.pred_count,
            protocol_error=protocol_error,
        )


@dataclass(frozen=True)
class EvaluationReport:
    """Corpus-level metrics plus per-document summaries."""

    dataset: str
    micro_precision: float
    micro_recall: float
    micro_f1: float
    breakdown: ErrorBreakdown
    per_document: tuple[DocumentScore, ...]
    runtime_ms: int

    def without_runtime(self) -> "EvaluationReport":
        """Copy with the runtime zeroed, for run-to-run comparisons."""
        return EvaluationReport(
            dataset=self.dataset,
            micro_precision=self.micro_precision,
            micro_recall=self.micro_recall,
            micro_f1=self.micro_f1,
            breakdown=self.breakdown,
            per_document=self.per_document,
            runtime_ms=0,
        )


def pr_delta(baseline: EvaluationReport, ablated: EvaluationReport) -> tuple[float, float]:
    """Precision and recall movement in percentage points, ablated - baseline."""
    if baseline.dataset != ablated.dataset:
        raise DatasetMismatch(f"cannot compare {baseline.dataset!r} with {ablated.dataset!r}")
    return (
        100.0 * (ablated.micro_precision - baseline.micro_precision),
        100.0 * (ablated.micro_recall - baseline.micro_recall),
    )
