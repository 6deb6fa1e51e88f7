"""Presupposition verification against a document.

A presupposition (the hypothesis) is scored against a set of premises drawn
from the document; it is verifiable when at least ``k`` premises entail it.
Premises come from three strategies:

  sentence-nli        document sentences
  hybrid-doc-presups  presuppositions mined from document sentences
  combined            the union of both

Scoring is pluggable behind one wire contract: POST /v1/score with
``{"pairs": [{"premise": ..., "hypothesis": ...}, ...], "mode": ...}``
returning ``{"scores": [{"entail_prob": ...}, ...]}`` aligned with the
request. A deterministic lexical-overlap scorer ships as the builtin
baseline, and the same request/response objects can be exchanged
one-per-line over files or stdin for offline scoring.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass
from importlib import resources
from typing import IO, Iterable, Mapping, Protocol, Sequence

import requests

from .presupgen import FactiveLexicon, Presupposition, default_lexicon, generate_presuppositions
from .treebank import Document, Question

STRATEGIES = ("sentence-nli", "hybrid-doc-presups", "combined")
MODES = ("independent", "joint")

_TOKEN_RE = re.compile(r"[a-z0-9']+")


class ScorerUnavailable(RuntimeError):
    """The external scorer endpoint is unreachable or returned non-200."""


class ProtocolError(RuntimeError):
    """The scorer responded with something that violates the wire contract."""


class MissingDocument(KeyError):
    pass


def _load_stopwords() -> frozenset[str]:
    text = resources.files(__package__).joinpath("data/stopwords.txt").read_text("utf-8")
    return frozenset(
        line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")
    )


STOPWORDS = _load_stopwords()


def content_tokens(text: str) -> set[str]:
    tokens = set()
    for tok in _TOKEN_RE.findall(text.lower()):
        tok = tok.strip("'")
        if tok and tok not in STOPWORDS:
            tokens.add(tok)
    return tokens


@dataclass(frozen=True)
class PremiseRef:
    """Either (doc_id, sentence index) or (doc_id, document-presupposition id)."""

    doc_id: str
    sentence: int | None = None
    doc_presup: str | None = None

    def to_json(self) -> dict:
        if self.doc_presup is not None:
            return {"doc_id": self.doc_id, "doc_presup": self.doc_presup}
        return {"doc_id": self.doc_id, "sentence": self.sentence}


@dataclass(frozen=True)
class EntailmentScore:
    premise_ref: PremiseRef
    entail_prob: float
    label: str  # "entail" | "not-entail"

    def to_json(self) -> dict:
        return {
            "premise_ref": self.premise_ref.to_json(),
            "entail_prob": self.entail_prob,
            "label": self.label,
        }


@dataclass
class VerifierConfig:
    k: int = 1
    decision_threshold: float = 0.5
    strategy: str = "sentence-nli"
    scorer: str = "builtin"
    mode: str = "independent"

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not 0.0 < self.decision_threshold < 1.0:
            raise ValueError("decision_threshold must lie in (0, 1)")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")


@dataclass(frozen=True)
class VerificationResult:
    presup_id: str
    verifiable: bool
    supporting: tuple[PremiseRef, ...]
    scores: tuple[EntailmentScore, ...]
    strategy: str

    def to_json(self, k: int) -> dict:
        return {
            "presup_id": self.presup_id,
            "verifiable": self.verifiable,
            "k": k,
            "strategy": self.strategy,
            "supporting": [ref.to_json() for ref in self.supporting],
            "scores": [score.to_json() for score in self.scores],
        }


class Scorer(Protocol):
    def score(self, pairs: Sequence[tuple[str, str]], mode: str = "independent") -> list[float]:
        """One entailment probability per (premise, hypothesis) pair, in order."""


class LexicalScorer:
    """Hermetic baseline: entail_prob is the fraction of the hypothesis's
    content tokens that also occur in the premise, clipped to [0, 1]."""

    def score(self, pairs: Sequence[tuple[str, str]], mode: str = "independent") -> list[float]:
        probs = []
        for premise, hypothesis in pairs:
            hyp_tokens = content_tokens(hypothesis)
            if not hyp_tokens:
                probs.append(0.0)
                continue
            overlap = len(content_tokens(premise) & hyp_tokens)
            probs.append(min(1.0, max(0.0, overlap / len(hyp_tokens))))
        return probs


class HttpScorer:
    """Client for the /v1/score wire endpoint. Requests are serialized; the
    response must align one score per request pair."""

    def __init__(self, base_url: str, timeout: float = 60.0, session: requests.Session | None = None):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.session = session or requests.Session()

    def score(self, pairs: Sequence[tuple[str, str]], mode: str = "independent") -> list[float]:
        body = {
            "pairs": [{"premise": p, "hypothesis": h} for p, h in pairs],
            "mode": mode,
        }
        try:
            response = self.session.post(f"{self.base_url}/v1/score", json=body, timeout=self.timeout)
        except requests.RequestException as exc:
            raise ScorerUnavailable(f"scorer at {self.base_url} unreachable: {exc}") from exc
        if response.status_code != 200:
            raise ScorerUnavailable(
                f"scorer at {self.base_url} returned status {response.status_code}"
            )
        return parse_score_response(response.text, expected=len(pairs))


def parse_score_response(payload: str, expected: int) -> list[float]:
    try:
        data = json.loads(payload)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"scorer response is not JSON: {exc}") from exc
    scores = data.get("scores") if isinstance(data, dict) else None
    if not isinstance(scores, list) or len(scores) != expected:
        raise ProtocolError(f"scorer response must carry {expected} scores")
    probs = []
    for item in scores:
        prob = item.get("entail_prob") if isinstance(item, dict) else None
        if not isinstance(prob, (int, float)) or not 0.0 <= float(prob) <= 1.0:
            raise ProtocolError(f"malformed score entry: {item!r}")
        probs.append(float(prob))
    return probs


def make_scorer(descriptor: str) -> Scorer:
    """"builtin" or an http(s) endpoint base URL."""
    if descriptor == "builtin":
        return LexicalScorer()
    if descriptor.startswith(("http://", "https://")):
        return HttpScorer(descriptor)
    raise ValueError(f"unknown scorer descriptor {descriptor!r}")


def score_pairs(
    premises: Sequence[str],
    hypothesis: str,
    scorer: Scorer,
    *,
    refs: Sequence[PremiseRef] | None = None,
    decision_threshold: float = 0.5,
    mode: str = "independent",
) -> list[EntailmentScore]:
    """Score the hypothesis against every premise, preserving order."""
    if not premises:
        raise ValueError("premises must be non-empty")
    if refs is None:
        refs = [PremiseRef(doc_id="", sentence=i) for i in range(len(premises))]
    if len(refs) != len(premises):
        raise ValueError("refs must align with premises")
    probs = scorer.score([(premise, hypothesis) for premise in premises], mode=mode)
    return [
        EntailmentScore(
            premise_ref=ref,
            entail_prob=prob,
            label="entail" if prob >= decision_threshold else "not-entail",
        )
        for ref, prob in zip(refs, probs)
    ]


def aggregate(
    scores: Sequence[EntailmentScore], cfg: VerifierConfig, presup_id: str = ""
) -> VerificationResult:
    """Verifiable iff at least cfg.k premises carry the entail label."""
    supporting = tuple(score.premise_ref for score in scores if score.label == "entail")
    return VerificationResult(
        presup_id=presup_id,
        verifiable=len(supporting) >= cfg.k,
        supporting=supporting,
        scores=tuple(scores),
        strategy=cfg.strategy,
    )


def doc_presuppositions(
    doc: Document, lexicon: FactiveLexicon | None = None
) -> list[Presupposition]:
    """Mine presuppositions from every parsed document sentence (question-word
    triggers disabled). Sentences without parses contribute nothing."""
    lexicon = lexicon or default_lexicon()
    mined: list[Presupposition] = []
    for idx, sentence in enumerate(doc.sentences):
        if sentence.tree is None:
            continue
        pseudo = Question(id=f"{doc.id}:s{idx}", text=sentence.text, tree=sentence.tree)
        mined.extend(generate_presuppositions(pseudo, lexicon, declarative=True))
    return mined


def _premises_for(
    doc: Document, strategy: str, mined: Sequence[Presupposition]
) -> tuple[list[str], list[PremiseRef]]:
    premises: list[str] = []
    refs: list[PremiseRef] = []
    if strategy in ("sentence-nli", "combined"):
        for idx, sentence in enumerate(doc.sentences):
            premises.append(sentence.text)
            refs.append(PremiseRef(doc_id=doc.id, sentence=idx))
    if strategy in ("hybrid-doc-presups", "combined"):
        for presup in mined:
            premises.append(presup.text)
            refs.append(PremiseRef(doc_id=doc.id, doc_presup=presup.id))
    return premises, refs


def verify_presupposition(
    presup: Presupposition,
    doc: Document,
    cfg: VerifierConfig,
    scorer: Scorer | None = None,
    *,
    lexicon: FactiveLexicon | None = None,
    doc_presups: Sequence[Presupposition] | None = None,
) -> VerificationResult:
    """Run the configured strategy end to end for one presupposition.

    ``doc_presups`` lets callers reuse mined document presuppositions across
    the many presuppositions verified against one document.
    """
    scorer = scorer or make_scorer(cfg.scorer)
    if cfg.strategy == "sentence-nli":
        mined: Sequence[Presupposition] = ()
    else:
        mined = doc_presups if doc_presups is not None else doc_presuppositions(doc, lexicon)
    premises, refs = _premises_for(doc, cfg.strategy, mined)
    if not premises:
        return VerificationResult(
            presup_id=presup.id,
            verifiable=False,
            supporting=(),
            scores=(),
            strategy=cfg.strategy,
        )
    scores = score_pairs(
        premises,
        presup.text,
        scorer,
        refs=refs,
        decision_threshold=cfg.decision_threshold,
        mode=cfg.mode,
    )
    return aggregate(scores, cfg, presup_id=presup.id)


@dataclass(frozen=True)
class PairExportRecord:
    question_id: str
    presup_id: str
    presupposition: str
    sentence: str
    sentence_index: int

    def to_json(self) -> dict:
        return {
            "question_id": self.question_id,
            "presup_id": self.presup_id,
            "presupposition": self.presupposition,
            "sentence": self.sentence,
            "sentence_index": self.sentence_index,
        }


def export_pairs(
    questions: Sequence[Question],
    documents: Mapping[str, Document],
    sample_n: int,
    *,
    seed: int = 0,
    presuppositions: Mapping[str, Sequence[Presupposition]] | None = None,
    lexicon: FactiveLexicon | None = None,
) -> list[PairExportRecord]:
    """(presupposition, sentence) pairs for annotation: per question, sample_n
    document sentences drawn uniformly without replacement (clamped to the
    document size), paired with each of the question's presuppositions."""
    rng = random.Random(seed)
    records: list[PairExportRecord] = []
    for question in questions:
        doc_id = question.doc_id or question.id
        doc = documents.get(doc_id)
        if doc is None:
            raise MissingDocument(doc_id)
        if presuppositions is not None:
            presups = presuppositions.get(question.id, ())
        else:
            presups = generate_presuppositions(question, lexicon)
        n = min(sample_n, len(doc.sentences))
        if n <= 0:
            continue
        indices = sorted(rng.sample(range(len(doc.sentences)), n))
        for presup in presups:
            for idx in indices:
                records.append(
                    PairExportRecord(
                        question_id=question.id,
                        presup_id=presup.id,
                        presupposition=presup.text,
                        sentence=doc.sentences[idx].text,
                        sentence_index=idx,
                    )
                )
    return records


def offline_score_stream(lines: Iterable[str], out: IO[str], scorer: Scorer) -> None:
    """Offline wire variant: one request JSON object per input line, one
    response JSON object per output line."""
    for line in lines:
        line = line.strip()
        if not line:
            continue
        request = json.loads(line)
        pairs = [(p["premise"], p["hypothesis"]) for p in request["pairs"]]
        mode = request.get("mode", "independent")
        probs = scorer.score(pairs, mode=mode)
        out.write(json.dumps({"scores": [{"entail_prob": prob} for prob in probs]}) + "\n")
