"""Batch pipeline: generate -> verify -> explain -> augment over JSONL corpora.

Outputs land in one directory as presuppositions.jsonl, verification.jsonl,
explanations.jsonl, augmented_flat.jsonl, and augmented_structured.jsonl.
With the builtin scorer and a fixed seed the whole run is deterministic:
records are written in input order and every id is derived from record ids.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from . import augment, explain as explain_mod, presupgen, verify as verify_mod
from .treebank import Document, Question, load_documents, load_questions
from .verify import MissingDocument, VerifierConfig


@dataclass
class PipelineConfig:
    verifier: VerifierConfig = field(default_factory=VerifierConfig)
    seed: int = 0
    max_global_tokens: int | None = None
    max_flat_tokens: int | None = None
    lowercase: bool = False
    projection_guard: bool = False
    factive_lexicon_path: str | None = None


def _write_jsonl(path: Path, records: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def resolve_document(question: Question, documents: dict[str, Document]) -> Document:
    doc_id = question.doc_id or question.id
    doc = documents.get(doc_id)
    if doc is None:
        raise MissingDocument(doc_id)
    return doc


def run_pipeline(
    questions_path: str | Path,
    documents_path: str | Path,
    cfg: PipelineConfig,
    out_dir: str | Path,
) -> None:
    """Run all stages and write the five output files. Raises typed errors
    (InputFormatError, MissingDocument, ScorerUnavailable, ProtocolError) for
    the CLI to report."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    questions = load_questions(questions_path, lowercase=cfg.lowercase)
    documents = load_documents(documents_path)
    lexicon = presupgen.FactiveLexicon.load(cfg.factive_lexicon_path)
    scorer = verify_mod.make_scorer(cfg.verifier.scorer)

    presups_by_question: dict[str, list[presupgen.Presupposition]] = {}
    for question in questions:
        presups_by_question[question.id] = presupgen.generate_presuppositions(
            question, lexicon, projection_guard=cfg.projection_guard
        )

    # Referential integrity before any scoring work.
    for question in questions:
        resolve_document(question, documents)

    doc_presup_cache: dict[str, list[presupgen.Presupposition]] = {}
    results_by_presup: dict[str, verify_mod.VerificationResult] = {}
    for question in questions:
        doc = resolve_document(question, documents)
        doc_presups = None
        if cfg.verifier.strategy != "sentence-nli":
            if doc.id not in doc_presup_cache:
                doc_presup_cache[doc.id] = verify_mod.doc_presuppositions(doc, lexicon)
            doc_presups = doc_presup_cache[doc.id]
        for presup in presups_by_question[question.id]:
            results_by_presup[presup.id] = verify_mod.verify_presupposition(
                presup, doc, cfg.verifier, scorer, lexicon=lexicon, doc_presups=doc_presups
            )

    _write_jsonl(
        out / "presuppositions.jsonl",
        (p.to_json() for q in questions for p in presups_by_question[q.id]),
    )
    _write_jsonl(
        out / "verification.jsonl",
        (
            results_by_presup[p.id].to_json(cfg.verifier.k)
            for q in questions
            for p in presups_by_question[q.id]
        ),
    )

    explanations = []
    for question in questions:
        for presup in presups_by_question[question.id]:
            rendered = explain_mod.explain(presup, results_by_presup[presup.id])
            if rendered is not None:
                explanations.append(rendered)
    _write_jsonl(out / "explanations.jsonl", (e.to_json() for e in explanations))

    vocab_texts = [q.text for q in questions]
    vocab_texts.extend(p.text for presups in presups_by_question.values() for p in presups)
    vocab_texts.extend(s.text for d in documents.values() for s in d.sentences)
    vocab = augment.Vocabulary.build(vocab_texts)

    flat_records = []
    structured_records = []
    for question in questions:
        pairs = [
            (p, results_by_presup[p.id]) for p in presups_by_question[question.id]
        ]
        flat_records.append(
            augment.encode_flat(question, pairs, vocab, max_tokens=cfg.max_flat_tokens).to_json()
        )
        doc = resolve_document(question, documents)
        structured_records.append(
            augment.encode_structured(
                question, pairs, doc, vocab, max_global_tokens=cfg.max_global_tokens
            ).to_json()
        )
    _write_jsonl(out / "augmented_flat.jsonl", flat_records)
    _write_jsonl(out / "augmented_structured.jsonl", structured_records)


def split_by_question(
    records: Sequence[dict], *, seed: int = 0, dev_fraction: float = 0.5
) -> tuple[list[dict], list[dict]]:
    """Hash-split records into (dev, test) keeping all records that share a
    question_id in the same split."""
    if not 0.0 <= dev_fraction <= 1.0:
        raise ValueError("dev_fraction must lie in [0, 1]")
    dev: list[dict] = []
    test: list[dict] = []
    for record in records:
        question_id = str(record.get("question_id", record.get("id", "")))
        digest = hashlib.sha256(f"{seed}:{question_id}".encode("utf-8")).hexdigest()
        bucket = int(digest[:8], 16) / 0xFFFFFFFF
        (dev if bucket < dev_fraction else test).append(record)
    return dev, test
