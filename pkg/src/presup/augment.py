"""Presupposition-augmented inputs for downstream QA models.

Two encodings are produced. The flat encoding appends, after the question's
token ids, one block per presupposition: separator id, presupposition token
ids, then the id of "1" or "0" for its verification label. The structured
encoding targets global/local long-document transformers: one global slot per
question, per document sentence, and per presupposition (slot value = the
verification label), with an attention mask given as allowed (from-range,
to-range) pairs over the combined [globals | long tokens] index space.
Presupposition long tokens may attend only to presupposition long tokens and
presupposition global slots.

Token ids come from an injected vocabulary; a whitespace tokenizer keeps
encode/decode exactly inverse for texts covered by the vocabulary.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

from .presupgen import Presupposition
from .treebank import Document, Question
from .verify import VerificationResult

log = logging.getLogger(__name__)

PAD_TOKEN = "[pad]"
SEP_TOKEN = "[sep]"
UNK_TOKEN = "[unk]"
QUESTION_GLOBAL_TOKEN = "[gq]"
SENTENCE_GLOBAL_TOKEN = "[gs]"


class OutOfRange(ValueError):
    pass


class Vocabulary:
    """Injective token <-> id mapping with reserved separator/padding/unknown
    ids. ``build`` derives a deterministic vocabulary from corpus texts."""

    def __init__(
        self,
        token_to_id: dict[str, int],
        *,
        pad_id: int,
        sep_id: int,
        unk_id: int,
        question_global_id: int | None = None,
        sentence_global_id: int | None = None,
    ):
        if len(set(token_to_id.values())) != len(token_to_id):
            raise ValueError("vocabulary mapping must be injective")
        self.token_to_id = dict(token_to_id)
        self.id_to_token = {i: t for t, i in token_to_id.items()}
        self.pad_id = pad_id
        self.sep_id = sep_id
        self.unk_id = unk_id
        self.question_global_id = question_global_id if question_global_id is not None else 0
        self.sentence_global_id = sentence_global_id if sentence_global_id is not None else 1

    @classmethod
    def build(cls, texts: Iterable[str]) -> "Vocabulary":
        tokens: set[str] = set()
        for text in texts:
            tokens.update(text.split())
        tokens.update({"0", "1"})
        specials = [PAD_TOKEN, SEP_TOKEN, UNK_TOKEN, QUESTION_GLOBAL_TOKEN, SENTENCE_GLOBAL_TOKEN]
        mapping: dict[str, int] = {}
        for idx, token in enumerate(specials + sorted(tokens - set(specials))):
            mapping[token] = idx
        return cls(
            mapping,
            pad_id=mapping[PAD_TOKEN],
            sep_id=mapping[SEP_TOKEN],
            unk_id=mapping[UNK_TOKEN],
            question_global_id=mapping[QUESTION_GLOBAL_TOKEN],
            sentence_global_id=mapping[SENTENCE_GLOBAL_TOKEN],
        )

    def id_for(self, token: str) -> int:
        return self.token_to_id.get(token, self.unk_id)

    def encode(self, text: str) -> list[int]:
        return [self.id_for(token) for token in text.split()]

    def decode(self, ids: Sequence[int]) -> str:
        return " ".join(self.id_to_token.get(i, UNK_TOKEN) for i in ids)


@dataclass(frozen=True)
class AugmentedInput:
    question_id: str
    token_ids: tuple[int, ...]

    def to_json(self) -> dict:
        return {"question_id": self.question_id, "token_ids": list(self.token_ids)}


def encode_flat(
    question: Question,
    presup_results: Sequence[tuple[Presupposition, VerificationResult]],
    vocab: Vocabulary,
    *,
    max_tokens: int | None = None,
) -> AugmentedInput:
    """Question ids followed by [sep, presup ids, label id] blocks in
    generation order. Blocks that would exceed ``max_tokens`` are dropped from
    the tail with a warning; the question itself is never truncated."""
    ids = vocab.encode(question.text)
    for presup, result in presup_results:
        label_token = "1" if result.verifiable else "0"
        block = [vocab.sep_id] + vocab.encode(presup.text) + [vocab.id_for(label_token)]
        if max_tokens is not None and len(ids) + len(block) > max_tokens:
            log.warning(
                "question %s: flat encoding truncated at %d tokens; dropping %s and later blocks",
                question.id,
                max_tokens,
                presup.id,
            )
            break
        ids.extend(block)
    return AugmentedInput(question_id=question.id, token_ids=tuple(ids))


def decode_flat(token_ids: Sequence[int], vocab: Vocabulary) -> tuple[str, list[tuple[str, int]]]:
    """Inverse of encode_flat: (question text, [(presupposition text, label)])."""
    blocks: list[list[int]] = [[]]
    for token_id in token_ids:
        if token_id == vocab.sep_id:
            blocks.append([])
        else:
            blocks[-1].append(token_id)
    question_text = vocab.decode(blocks[0])
    decoded: list[tuple[str, int]] = []
    for block in blocks[1:]:
        if not block:
            raise ValueError("empty presupposition block")
        label_token = vocab.id_to_token.get(block[-1], "")
        if label_token not in ("0", "1"):
            raise ValueError(f"block does not end in a verification label: {block}")
        decoded.append((vocab.decode(block[:-1]), int(label_token)))
    return question_text, decoded


@dataclass(frozen=True)
class GlobalSlot:
    kind: str  # question | sentence | presupposition
    value: int

    def to_json(self) -> dict:
        return {"kind": self.kind, "value": self.value}


@dataclass(frozen=True)
class Segment:
    kind: str
    token_ids: tuple[int, ...]

    def to_json(self) -> dict:
        return {"kind": self.kind, "token_ids": list(self.token_ids)}


@dataclass(frozen=True)
class MaskRange:
    """Every position in [from) may attend to every position in [to)."""

    from_range: tuple[int, int]
    to_range: tuple[int, int]

    def to_json(self) -> dict:
        return {"from": list(self.from_range), "to": list(self.to_range)}


@dataclass(frozen=True)
class StructuredLayout:
    question_id: str
    global_tokens: tuple[GlobalSlot, ...]
    segments: tuple[Segment, ...]
    attention_mask: tuple[MaskRange, ...]

    def to_json(self) -> dict:
        return {
            "question_id": self.question_id,
            "global": [slot.to_json() for slot in self.global_tokens],
            "segments": [seg.to_json() for seg in self.segments],
            "mask": [rng.to_json() for rng in self.attention_mask],
        }

    def num_long_tokens(self) -> int:
        return sum(len(seg.token_ids) for seg in self.segments)


def encode_structured(
    question: Question,
    presup_results: Sequence[tuple[Presupposition, VerificationResult]],
    doc: Document,
    vocab: Vocabulary,
    *,
    max_global_tokens: int | None = None,
) -> StructuredLayout:
    """Global/local layout: question slot, one slot per sentence, then one
    slot per presupposition valued by its verification label. Long tokens are
    segmented in the same order. Presupposition slots beyond
    ``max_global_tokens`` are dropped from the tail with a warning."""
    pairs = list(presup_results)
    base_slots = 1 + len(doc.sentences)
    if max_global_tokens is not None:
        budget = max_global_tokens - base_slots
        if budget < 0:
            log.warning(
                "question %s: %d base global slots exceed the cap %d; keeping them",
                question.id,
                base_slots,
                max_global_tokens,
            )
            budget = 0
        if len(pairs) > budget:
            log.warning(
                "question %s: dropping %d presupposition slots over the global cap",
                question.id,
                len(pairs) - budget,
            )
            pairs = pairs[:budget]

    slots = [GlobalSlot("question", vocab.question_global_id)]
    segments = [Segment("question", tuple(vocab.encode(question.text)))]
    for sentence in doc.sentences:
        slots.append(GlobalSlot("sentence", vocab.sentence_global_id))
        segments.append(Segment("sentence", tuple(vocab.encode(sentence.text))))
    for presup, result in pairs:
        slots.append(GlobalSlot("presupposition", 1 if result.verifiable else 0))
        segments.append(Segment("presupposition", tuple(vocab.encode(presup.text))))

    mask = _build_mask(slots, segments)
    return StructuredLayout(
        question_id=question.id,
        global_tokens=tuple(slots),
        segments=tuple(segments),
        attention_mask=tuple(mask),
    )


def _build_mask(slots: Sequence[GlobalSlot], segments: Sequence[Segment]) -> list[MaskRange]:
    n_global = len(slots)
    long_ranges: list[tuple[int, int]] = []
    cursor = n_global
    for segment in segments:
        long_ranges.append((cursor, cursor + len(segment.token_ids)))
        cursor += len(segment.token_ids)

    mask: list[MaskRange] = []

    def add(from_range: tuple[int, int], to_range: tuple[int, int]) -> None:
        if from_range[0] < from_range[1] and to_range[0] < to_range[1]:
            mask.append(MaskRange(from_range, to_range))

    # Global tokens see each other regardless of segment kind.
    add((0, n_global), (0, n_global))

    presup_global: tuple[int, int] | None = None
    presup_long: tuple[int, int] | None = None
    for idx, slot in enumerate(slots):
        add((idx, idx + 1), long_ranges[idx])  # global -> own segment
        if slot.kind == "presupposition":
            presup_global = (presup_global[0], idx + 1) if presup_global else (idx, idx + 1)
            lo, hi = long_ranges[idx]
            presup_long = (presup_long[0], hi) if presup_long else (lo, hi)
        else:
            add(long_ranges[idx], long_ranges[idx])  # long tokens within segment
            add(long_ranges[idx], (idx, idx + 1))  # long tokens -> own global

    if presup_long is not None:
        add(presup_long, presup_long)
        if presup_global is not None:
            add(presup_long, presup_global)
    return mask


def expand_mask(layout: StructuredLayout) -> set[tuple[int, int]]:
    """Materialize all allowed (from, to) attention pairs; intended for tests
    and small inputs."""
    pairs: set[tuple[int, int]] = set()
    for rng in layout.attention_mask:
        for i in range(*rng.from_range):
            for j in range(*rng.to_range):
                pairs.add((i, j))
    return pairs


@dataclass(frozen=True)
class AnswerTypeLogits:
    unanswerable: float
    long_answer: float
    short_answer: float
    yes: float
    no: float


def classify_unanswerable(logits: AnswerTypeLogits) -> bool:
    """True iff the unanswerable logit strictly exceeds the sum of the other
    four answer-type logits."""
    others = logits.long_answer + logits.short_answer + logits.yes + logits.no
    return logits.unanswerable > others


def null_count_to_label(null_answers: int, total_annotations: int, *, threshold: int = 4) -> bool:
    """Binary unanswerability from annotation null counts: at least
    ``threshold`` null answers means unanswerable."""
    if total_annotations < 0 or not 0 <= null_answers <= total_annotations:
        raise OutOfRange(
            f"null_answers={null_answers} must lie in [0, total_annotations={total_annotations}]"
        )
    return null_answers >= threshold
