"""Command-line driver: per-stage subcommands plus the full pipeline.

Errors are reported as one JSON object on stderr and a nonzero exit status.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import augment, explain as explain_mod, metrics, pipeline, presupgen, verify as verify_mod
from .treebank import InputFormatError, load_documents, load_questions
from .verify import (
    MissingDocument,
    ProtocolError,
    ScorerUnavailable,
    VerifierConfig,
)


def _add_verifier_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scorer", default=None, help="builtin or a scorer endpoint URL "
                        "(falls back to $PRESUP_SCORER_URL, then builtin)")
    parser.add_argument("--strategy", default="sentence-nli", choices=verify_mod.STRATEGIES)
    parser.add_argument("--k", type=int, default=1, help="premises required for verifiability")
    parser.add_argument("--threshold", type=float, default=0.5, help="entailment decision threshold")
    parser.add_argument("--mode", default="independent", choices=verify_mod.MODES,
                        help="scorer batch mode")


def _resolve_scorer(value: str | None) -> str:
    return value or os.environ.get("PRESUP_SCORER_URL") or "builtin"


def _verifier_config(args: argparse.Namespace) -> VerifierConfig:
    return VerifierConfig(
        k=args.k,
        decision_threshold=args.threshold,
        strategy=args.strategy,
        scorer=_resolve_scorer(args.scorer),
        mode=args.mode,
    )


def _write_jsonl(path: str, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def _read_jsonl(path: str) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def _load_presuppositions(path: str) -> list[presupgen.Presupposition]:
    presups = []
    for record in _read_jsonl(path):
        presups.append(
            presupgen.Presupposition(
                id=record["presup_id"],
                question_id=record["question_id"],
                text=record["text"],
                kind=presupgen.TriggerKind(record["kind"]),
                template_id=record["template_id"],
                source_spans=tuple(tuple(span) for span in record.get("source_spans", [])),
            )
        )
    return presups


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="presup")
    sub = parser.add_subparsers(dest="command", required=True)

    p_generate = sub.add_parser("generate", help="generate presuppositions from question parses")
    p_generate.add_argument("--questions", required=True)
    p_generate.add_argument("--out", required=True)
    p_generate.add_argument("--factive-lexicon", default=None)
    p_generate.add_argument("--lowercase", action="store_true")
    p_generate.add_argument("--projection-guard", action="store_true")

    p_verify = sub.add_parser("verify", help="verify presuppositions against documents")
    p_verify.add_argument("--presuppositions", required=True)
    p_verify.add_argument("--questions", required=True)
    p_verify.add_argument("--documents", required=True)
    p_verify.add_argument("--out", required=True)
    _add_verifier_flags(p_verify)

    p_explain = sub.add_parser("explain", help="render unanswerability explanations")
    p_explain.add_argument("--presuppositions", required=True)
    p_explain.add_argument("--verification", required=True)
    p_explain.add_argument("--out", required=True)

    p_augment = sub.add_parser("augment", help="emit flat and structured augmented inputs")
    p_augment.add_argument("--questions", required=True)
    p_augment.add_argument("--presuppositions", required=True)
    p_augment.add_argument("--verification", required=True)
    p_augment.add_argument("--documents", required=True)
    p_augment.add_argument("--out", required=True, help="output directory")
    p_augment.add_argument("--max-global-tokens", type=int, default=None)
    p_augment.add_argument("--max-flat-tokens", type=int, default=None)

    p_export = sub.add_parser("export-pairs", help="sample (presupposition, sentence) pairs")
    p_export.add_argument("--questions", required=True)
    p_export.add_argument("--documents", required=True)
    p_export.add_argument("--out", required=True)
    p_export.add_argument("--sample-n", type=int, default=5)
    p_export.add_argument("--seed", type=int, default=0)

    p_split = sub.add_parser("split", help="dev/test split keeping question groups intact")
    p_split.add_argument("--records", required=True)
    p_split.add_argument("--out-dev", required=True)
    p_split.add_argument("--out-test", required=True)
    p_split.add_argument("--dev-fraction", type=float, default=0.5)
    p_split.add_argument("--seed", type=int, default=0)

    p_eval = sub.add_parser("eval", help="accuracy and macro F1 against gold labels")
    p_eval.add_argument("--predictions", required=True)
    p_eval.add_argument("--gold", required=True)

    p_run = sub.add_parser("run", help="full pipeline: generate, verify, explain, augment")
    p_run.add_argument("--questions", required=True)
    p_run.add_argument("--documents", required=True)
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--max-global-tokens", type=int, default=None)
    p_run.add_argument("--max-flat-tokens", type=int, default=None)
    p_run.add_argument("--lowercase", action="store_true")
    p_run.add_argument("--projection-guard", action="store_true")
    p_run.add_argument("--factive-lexicon", default=None)
    _add_verifier_flags(p_run)

    p_offline = sub.add_parser(
        "score-offline", help="offline scorer: request JSON per line in, response per line out"
    )
    p_offline.add_argument("--input", default="-", help="request file, '-' for stdin")
    p_offline.add_argument("--output", default="-", help="response file, '-' for stdout")
    p_offline.add_argument("--scorer", default="builtin")

    return parser


def _cmd_generate(args: argparse.Namespace) -> int:
    questions = load_questions(args.questions, lowercase=args.lowercase)
    lexicon = presupgen.FactiveLexicon.load(args.factive_lexicon)
    records = []
    for question in questions:
        for presup in presupgen.generate_presuppositions(
            question, lexicon, projection_guard=args.projection_guard
        ):
            records.append(presup.to_json())
    _write_jsonl(args.out, records)
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    cfg = _verifier_config(args)
    presups = _load_presuppositions(args.presuppositions)
    questions = {q.id: q for q in load_questions(args.questions)}
    documents = load_documents(args.documents)
    scorer = verify_mod.make_scorer(cfg.scorer)
    doc_presup_cache: dict[str, list[presupgen.Presupposition]] = {}
    records = []
    for presup in presups:
        question = questions.get(presup.question_id)
        if question is None:
            raise MissingDocument(presup.question_id)
        doc = pipeline.resolve_document(question, documents)
        doc_presups = None
        if cfg.strategy != "sentence-nli":
            if doc.id not in doc_presup_cache:
                doc_presup_cache[doc.id] = verify_mod.doc_presuppositions(doc)
            doc_presups = doc_presup_cache[doc.id]
        result = verify_mod.verify_presupposition(
            presup, doc, cfg, scorer, doc_presups=doc_presups
        )
        records.append(result.to_json(cfg.k))
    _write_jsonl(args.out, records)
    return 0


def _cmd_explain(args: argparse.Namespace) -> int:
    presups = {p.id: p for p in _load_presuppositions(args.presuppositions)}
    records = []
    for raw in _read_jsonl(args.verification):
        presup = presups.get(raw["presup_id"])
        if presup is None:
            continue
        result = verify_mod.VerificationResult(
            presup_id=raw["presup_id"],
            verifiable=raw["verifiable"],
            supporting=(),
            scores=(),
            strategy=raw.get("strategy", "sentence-nli"),
        )
        rendered = explain_mod.explain(presup, result)
        if rendered is not None:
            records.append(rendered.to_json())
    _write_jsonl(args.out, records)
    return 0


def _cmd_augment(args: argparse.Namespace) -> int:
    questions = load_questions(args.questions)
    documents = load_documents(args.documents)
    presups = _load_presuppositions(args.presuppositions)
    results = {}
    for raw in _read_jsonl(args.verification):
        results[raw["presup_id"]] = verify_mod.VerificationResult(
            presup_id=raw["presup_id"],
            verifiable=raw["verifiable"],
            supporting=(),
            scores=(),
            strategy=raw.get("strategy", "sentence-nli"),
        )
    by_question: dict[str, list[presupgen.Presupposition]] = {}
    for presup in presups:
        by_question.setdefault(presup.question_id, []).append(presup)

    vocab_texts = [q.text for q in questions]
    vocab_texts.extend(p.text for p in presups)
    vocab_texts.extend(s.text for d in documents.values() for s in d.sentences)
    vocab = augment.Vocabulary.build(vocab_texts)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    flat_records, structured_records = [], []
    for question in questions:
        pairs = [
            (p, results[p.id]) for p in by_question.get(question.id, []) if p.id in results
        ]
        flat_records.append(
            augment.encode_flat(question, pairs, vocab, max_tokens=args.max_flat_tokens).to_json()
        )
        doc = pipeline.resolve_document(question, documents)
        structured_records.append(
            augment.encode_structured(
                question, pairs, doc, vocab, max_global_tokens=args.max_global_tokens
            ).to_json()
        )
    _write_jsonl(str(out_dir / "augmented_flat.jsonl"), flat_records)
    _write_jsonl(str(out_dir / "augmented_structured.jsonl"), structured_records)
    return 0


def _cmd_export_pairs(args: argparse.Namespace) -> int:
    questions = load_questions(args.questions)
    documents = load_documents(args.documents)
    records = verify_mod.export_pairs(questions, documents, args.sample_n, seed=args.seed)
    _write_jsonl(args.out, (r.to_json() for r in records))
    return 0


def _cmd_split(args: argparse.Namespace) -> int:
    records = _read_jsonl(args.records)
    dev, test = pipeline.split_by_question(
        records, seed=args.seed, dev_fraction=args.dev_fraction
    )
    _write_jsonl(args.out_dev, dev)
    _write_jsonl(args.out_test, test)
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    report = metrics.evaluate(args.predictions, args.gold)
    print(metrics.report_to_json(report))
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = pipeline.PipelineConfig(
        verifier=_verifier_config(args),
        seed=args.seed,
        max_global_tokens=args.max_global_tokens,
        max_flat_tokens=args.max_flat_tokens,
        lowercase=args.lowercase,
        projection_guard=args.projection_guard,
        factive_lexicon_path=args.factive_lexicon,
    )
    pipeline.run_pipeline(args.questions, args.documents, cfg, args.out)
    return 0


def _cmd_score_offline(args: argparse.Namespace) -> int:
    scorer = verify_mod.make_scorer(_resolve_scorer(args.scorer))
    lines = sys.stdin if args.input == "-" else open(args.input, encoding="utf-8")
    out = sys.stdout if args.output == "-" else open(args.output, "w", encoding="utf-8")
    try:
        verify_mod.offline_score_stream(lines, out, scorer)
    finally:
        if lines is not sys.stdin:
            lines.close()
        if out is not sys.stdout:
            out.close()
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "verify": _cmd_verify,
    "explain": _cmd_explain,
    "augment": _cmd_augment,
    "export-pairs": _cmd_export_pairs,
    "split": _cmd_split,
    "eval": _cmd_eval,
    "run": _cmd_run,
    "score-offline": _cmd_score_offline,
}


def _error_report(kind: str, exc: Exception) -> dict:
    report = {"error": kind, "detail": str(exc)}
    if isinstance(exc, InputFormatError):
        report["file"] = exc.path
        report["line"] = exc.line
    return report


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except InputFormatError as exc:
        print(json.dumps(_error_report("input-format", exc)), file=sys.stderr)
    except MissingDocument as exc:
        print(json.dumps(_error_report("missing-document", exc)), file=sys.stderr)
    except metrics.MissingGold as exc:
        print(json.dumps(_error_report("missing-gold", exc)), file=sys.stderr)
    except ScorerUnavailable as exc:
        print(json.dumps(_error_report("scorer-unavailable", exc)), file=sys.stderr)
    except ProtocolError as exc:
        print(json.dumps(_error_report("scorer-protocol", exc)), file=sys.stderr)
    except (ValueError, OSError) as exc:
        print(json.dumps(_error_report("invalid-input", exc)), file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
