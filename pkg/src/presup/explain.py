"""Template-based unanswerability explanations.

An unverifiable presupposition is rendered behind a fixed prefix; the
contextual-uniqueness template gets "it is unclear that" since uniqueness is
a contextual judgment rather than a fact lookup, everything else gets
"we could not verify that".
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .presupgen import UNIQUENESS_TEMPLATE_ID, Presupposition
from .verify import VerificationResult

PREFIX = "This question is unanswerable because "
TEMPLATE_COULD_NOT_VERIFY = "could-not-verify"
TEMPLATE_UNCLEAR = "unclear"


class MismatchedIds(ValueError):
    pass


@dataclass(frozen=True)
class Explanation:
    question_id: str
    text: str
    presup_id: str
    template: str  # could-not-verify | unclear

    def to_json(self) -> dict:
        return {
            "question_id": self.question_id,
            "presup_id": self.presup_id,
            "template": self.template,
            "text": self.text,
        }


def explain(presup: Presupposition, result: VerificationResult) -> Explanation | None:
    """None for verifiable presuppositions, otherwise the templated sentence."""
    if result.presup_id != presup.id:
        raise MismatchedIds(f"result {result.presup_id!r} does not match presupposition {presup.id!r}")
    if result.verifiable:
        return None
    if presup.template_id == UNIQUENESS_TEMPLATE_ID:
        template = TEMPLATE_UNCLEAR
        connective = "it is unclear that "
    else:
        template = TEMPLATE_COULD_NOT_VERIFY
        connective = "we could not verify that "
    return Explanation(
        question_id=presup.question_id,
        text=PREFIX + connective + presup.text + ".",
        presup_id=presup.id,
        template=template,
    )


def select_primary_explanation(
    explanations: Sequence[Explanation],
    presuppositions: Mapping[str, Presupposition] | None = None,
) -> Explanation | None:
    """Deterministic, order-independent choice of one explanation per
    question: non-uniqueness templates first, then earliest source span.
    ``presuppositions`` (id -> presupposition) supplies the spans; without it
    the span criterion falls back to the presupposition id."""
    if not explanations:
        return None

    def span_start(exp: Explanation) -> int:
        if presuppositions is None:
            return 0
        presup = presuppositions.get(exp.presup_id)
        if presup is None or not presup.source_spans:
            return 0
        return min(start for start, _ in presup.source_spans)

    return min(
        explanations,
        key=lambda e: (e.template == TEMPLATE_UNCLEAR, span_start(e), e.presup_id, e.text),
    )
