"""Command line interface.

Subcommands:

* serve: bind the annotate service and block.
* run: benchmark a corpus against an in-process linker or a remote endpoint.
* ablate: run the same corpus under the dictionary, full-vocabulary and
  empty candidate policies and emit comparison tables.
* score: score a prediction file offline against a gold corpus.

Exit codes: 0 on success, 2 on usage errors, 1 on runtime failures.
"""

from __future__ import annotations

import argparse
import functools
import random
import sys
from pathlib import Path

from .candidates import (
    AliasDictionary,
    CandidateMode,
    CandidatePolicy,
    load_alias_dictionary,
    load_vocabulary,
)
from .conll import parse_conll
from .errors import LinkEvalError, MalformedLine, UsageError
from .linkers import (
    CoherenceParams,
    EmbeddingTable,
    link_coherence_rerank,
    link_prior_argmax,
    link_token_merge,
    load_embeddings,
)
from .model import EntityId
from .reports import DELTA_FILE, RATIO_FILE, emit_report, write_delta_file, write_ratio_file
from .runner import (
    LINKER_CHOICES,
    POLICY_CHOICES,
    HttpAnnotator,
    InProcessAnnotator,
    PredictionFileAnnotator,
    RunConfig,
    run_benchmark,
)
from .scoring import pr_delta
from .service import AnnotationPipeline, LinkerFn, RawTriple, serve


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--policy", choices=POLICY_CHOICES, default="dict", help="candidate policy")
    parser.add_argument("--dict-path", help="alias dictionary TSV (mention<TAB>entity<TAB>prior)")
    parser.add_argument("--vocab-path", help="entity vocabulary file, one id per line")
    parser.add_argument("--embeddings-path", help="embedding table (key<TAB>v1 v2 ... vd)")
    parser.add_argument("--linker", choices=LINKER_CHOICES, default="prior_argmax")
    parser.add_argument("--n", type=int, default=5, help="max tokens per enumerated span")
    parser.add_argument("--max-tokens", type=int, default=512, help="max tokens per segment")
    parser.add_argument("--top-p", type=int, default=30, help="candidates re-scored per span")
    parser.add_argument("--beam-width", type=int, default=5, help="beam width for constrained decoding")
    parser.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="linkeval", description="entity linking evaluation harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="run the annotate service")
    _add_common_flags(p_serve)
    p_serve.add_argument("--endpoint", default="127.0.0.1:8400", help="host:port to bind")

    p_run = sub.add_parser("run", help="benchmark a corpus")
    _add_common_flags(p_run)
    p_run.add_argument("--corpus", required=True, help="CoNLL-style corpus file")
    p_run.add_argument("--endpoint", help="annotate service URL; omit to run in-process")
    p_run.add_argument("--out", default="out", help="report output directory")
    p_run.add_argument("--parallel", type=int, default=1, help="concurrent documents")

    p_ablate = sub.add_parser("ablate", help="compare candidate policies on one corpus")
    _add_common_flags(p_ablate)
    p_ablate.add_argument("--corpus", required=True)
    p_ablate.add_argument("--out", default="out")
    p_ablate.add_argument("--parallel", type=int, default=1)

    p_score = sub.add_parser("score", help="score a prediction file against a gold corpus")
    p_score.add_argument("--corpus", required=True, help="gold CoNLL-style corpus file")
    p_score.add_argument("--predictions", required=True, help="TSV: doc_id<TAB>begin<TAB>end<TAB>entity")
    p_score.add_argument("--dict-path")
    p_score.add_argument("--vocab-path")
    p_score.add_argument("--out", default="out")
    p_score.add_argument("--seed", type=int, default=0)
    return parser


def _load_resources(args: argparse.Namespace) -> tuple[AliasDictionary | None, tuple[EntityId, ...] | None]:
    dictionary = None
    vocabulary = None
    if getattr(args, "dict_path", None):
        dictionary = load_alias_dictionary(Path(args.dict_path).read_bytes())
    if getattr(args, "vocab_path", None):
        vocabulary = load_vocabulary(Path(args.vocab_path).read_bytes())
    return dictionary, vocabulary


def _full_vocabulary(
    dictionary: AliasDictionary | None, vocabulary: tuple[EntityId, ...] | None
) -> tuple[EntityId, ...]:
    if vocabulary is not None:
        return vocabulary
    if dictionary is not None:
        return tuple(sorted(dictionary.vocabulary, key=lambda e: e.id))
    raise UsageError("full-vocabulary policy needs --vocab-path or --dict-path")


def build_policy(
    mode: str,
    dictionary: AliasDictionary | None,
    vocabulary: tuple[EntityId, ...] | None,
) -> CandidatePolicy:
    if mode == "dict":
        if dictionary is None:
            raise UsageError("dictionary policy needs --dict-path")
        return CandidatePolicy(CandidateMode.DICTIONARY, dictionary=dictionary)
    if mode == "full":
        return CandidatePolicy(CandidateMode.FULL_VOCABULARY, full_vocabulary=_full_vocabulary(dictionary, vocabulary))
    return CandidatePolicy(CandidateMode.EMPTY)


def build_linker(args: argparse.Namespace, policy: CandidatePolicy) -> LinkerFn:
    if args.linker == "prior_argmax":
        return functools.partial(link_prior_argmax, policy=policy, max_span_tokens=args.n)
    if args.linker == "coherence":
        if getattr(args, "embeddings_path", None):
            embeddings = load_embeddings(Path(args.embeddings_path).read_bytes())
        else:
            embeddings = EmbeddingTable.empty()
        params = CoherenceParams.zeros(embeddings.dimension)
        return functools.partial(
            link_coherence_rerank,
            policy=policy,
            embeddings=embeddings,
            params=params,
            top_p=args.top_p,
            max_span_tokens=args.n,
        )
    return functools.partial(link_token_merge, policy=policy)


def _scoring_vocabulary(
    dictionary: AliasDictionary | None, vocabulary: tuple[EntityId, ...] | None
) -> frozenset[EntityId] | None:
    if vocabulary is not None:
        return frozenset(e for e in vocabulary if not e.is_none)
    if dictionary is not None:
        return frozenset(e for e in dictionary.vocabulary if not e.is_none)
    return None


def _parse_endpoint(value: str) -> tuple[str, int]:
    host, _, port_text = value.rpartition(":")
    if not host or not port_text.isdigit():
        raise UsageError(f"endpoint must look like host:port, got {value!r}")
    return host, int(port_text)


def load_predictions(data: bytes | str) -> dict[str, list[RawTriple]]:
    """Parse a prediction TSV: doc_id<TAB>begin<TAB>end<TAB>entity."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    by_doc: dict[str, list[RawTriple]] = {}
    for number, line in enumerate(data.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = line.rstrip("\n\r").split("\t")
        if len(fields) != 4:
            raise MalformedLine(f"expected 4 tab-separated fields, got {len(fields)}", number)
        doc_id, begin_text, end_text, entity = fields
        try:
            begin, end = int(begin_text), int(end_text)
        except ValueError as exc:
            raise MalformedLine(f"offsets must be integers: {exc}", number) from exc
        if not entity:
            raise MalformedLine("entity must be non-empty", number)
        by_doc.setdefault(doc_id, []).append((begin, end, entity))
    return by_doc


def _make_config(args: argparse.Namespace, dataset: str) -> RunConfig:
    return RunConfig(
        dataset=dataset,
        policy=getattr(args, "policy", "dict"),
        linker=getattr(args, "linker", "prior_argmax"),
        dict_path=getattr(args, "dict_path", None),
        vocab_path=getattr(args, "vocab_path", None),
        embeddings_path=getattr(args, "embeddings_path", None),
        max_span_tokens=getattr(args, "n", 5),
        max_tokens=getattr(args, "max_tokens", 512),
        top_p=getattr(args, "top_p", 30),
        beam_width=getattr(args, "beam_width", 5),
        endpoint=getattr(args, "endpoint", None),
        out_dir=getattr(args, "out", None),
        seed=getattr(args, "seed", 0),
        parallel=getattr(args, "parallel", 1),
    )


def _cmd_serve(args: argparse.Namespace) -> int:
    dictionary, vocabulary = _load_resources(args)
    policy = build_policy(args.policy, dictionary, vocabulary)
    pipeline = AnnotationPipeline(build_linker(args, policy), max_tokens=args.max_tokens, name=args.linker)
    host, port = _parse_endpoint(args.endpoint)
    service = serve(pipeline, host, port)
    print(f"serving {args.linker} on {service.endpoint}", flush=True)
    try:
        service.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        service.server_close()
    return 0


def _print_report_lines(report, paths) -> None:
    print(f"dataset={report.dataset} P={report.micro_precision:.4f} R={report.micro_recall:.4f} F1={report.micro_f1:.4f}")
    for path in paths:
        print(f"wrote {path}")


def _cmd_run(args: argparse.Namespace) -> int:
    random.seed(args.seed)
    corpus_path = Path(args.corpus)
    corpus = parse_conll(corpus_path.read_bytes(), name=corpus_path.stem)
    dictionary, vocabulary = _load_resources(args)
    config = _make_config(args, corpus.name)
    if args.endpoint:
        annotator = HttpAnnotator(args.endpoint)
    else:
        policy = build_policy(args.policy, dictionary, vocabulary)
        annotator = InProcessAnnotator(
            AnnotationPipeline(build_linker(args, policy), max_tokens=args.max_tokens, name=args.linker)
        )
    report = run_benchmark(corpus, annotator, config, vocabulary=_scoring_vocabulary(dictionary, vocabulary))
    paths = emit_report(report, Path(args.out))
    _print_report_lines(report, paths)
    return 0


def _cmd_ablate(args: argparse.Namespace) -> int:
    random.seed(args.seed)
    corpus_path = Path(args.corpus)
    corpus = parse_conll(corpus_path.read_bytes(), name=corpus_path.stem)
    dictionary, vocabulary = _load_resources(args)
    if dictionary is None:
        raise UsageError("ablate needs --dict-path for its dictionary baseline")
    scoring_vocab = _scoring_vocabulary(dictionary, vocabulary)

    out = Path(args.out)
    reports = {}
    for mode in ("dict", "full", "empty"):
        policy = build_policy(mode, dictionary, vocabulary)
        pipeline = AnnotationPipeline(build_linker(args, policy), max_tokens=args.max_tokens, name=args.linker)
        config = _make_config(args, corpus.name)
        report = run_benchmark(corpus, InProcessAnnotator(pipeline), config, vocabulary=scoring_vocab)
        reports[mode] = report
        emit_report(report, out / mode, label=mode)
        print(f"{mode}: P={report.micro_precision:.4f} R={report.micro_recall:.4f} F1={report.micro_f1:.4f}")

    ratio_path = write_ratio_file([(mode, reports[mode].breakdown) for mode in ("dict", "full", "empty")], out / RATIO_FILE)
    delta_rows = []
    for mode in ("full", "empty"):
        p_d, r_d = pr_delta(reports["dict"], reports[mode])
        delta_rows.append((mode, p_d, r_d))
    delta_path = write_delta_file(delta_rows, out / DELTA_FILE)
    print(f"wrote {ratio_path}")
    print(f"wrote {delta_path}")
    return 0


def _cmd_score(args: argparse.Namespace) -> int:
    corpus_path = Path(args.corpus)
    corpus = parse_conll(corpus_path.read_bytes(), name=corpus_path.stem)
    predictions = load_predictions(Path(args.predictions).read_bytes())
    dictionary, vocabulary = _load_resources(args)
    scoring_vocab = _scoring_vocabulary(dictionary, vocabulary)
    if scoring_vocab is None:
        from .model import make_entity
        from .runner import derive_vocabulary

        pred_entities = [make_entity(e) for triples in predictions.values() for _, _, e in triples]
        scoring_vocab = derive_vocabulary(corpus, extra=pred_entities)
    config = RunConfig(dataset=corpus.name, seed=args.seed)
    report = run_benchmark(corpus, PredictionFileAnnotator(predictions), config, vocabulary=scoring_vocab)
    paths = emit_report(report, Path(args.out))
    _print_report_lines(report, paths)
    return 0


_COMMANDS = {
    "serve": _cmd_serve,
    "run": _cmd_run,
    "ablate": _cmd_ablate,
    "score": _cmd_score,
}


def cli_main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except LinkEvalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())
