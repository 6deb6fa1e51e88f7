import re

import pytest
from hypothesis import given
from hypothesis import strategies as st

from presup.explain import (
    TEMPLATE_COULD_NOT_VERIFY,
    TEMPLATE_UNCLEAR,
    Explanation,
    MismatchedIds,
    explain,
    select_primary_explanation,
)
from presup.presupgen import Presupposition, TriggerKind, generate_presuppositions
from presup.verify import VerificationResult

EXPLANATION_PATTERN = re.compile(
    r"^This question is unanswerable because (we could not verify that|it is unclear that) .+\.$"
)


def make_presup(text, template_id="wh-when", pid="p0", spans=((0, 1),)):
    return Presupposition(
        id=pid,
        question_id="q0",
        text=text,
        kind=TriggerKind.WH_WORD,
        template_id=template_id,
        source_spans=spans,
    )


def make_result(pid="p0", verifiable=False):
    return VerificationResult(
        presup_id=pid, verifiable=verifiable, supporting=(), scores=(), strategy="sentence-nli"
    )


def test_unverifiable_renders_exact_string(demo_question_map, golden_explanation):
    question = demo_question_map[golden_explanation["question_id"]]
    presups = generate_presuppositions(question)
    target = [p for p in presups if p.text == golden_explanation["presupposition"]]
    assert target, "expected presupposition was not generated"
    rendered = explain(target[0], make_result(pid=target[0].id))
    assert rendered is not None
    assert rendered.text == golden_explanation["explanation"]
    assert rendered.template == TEMPLATE_COULD_NOT_VERIFY


def test_verifiable_yields_none():
    presup = make_presup("the sun rotates")
    assert explain(presup, make_result(verifiable=True)) is None


def test_uniqueness_template_uses_unclear_prefix():
    presup = make_presup(
        "'year of the cat in chinese zodiac' is contextually unique", template_id="def-unique"
    )
    rendered = explain(presup, make_result())
    assert rendered is not None
    assert rendered.template == TEMPLATE_UNCLEAR
    assert rendered.text == (
        "This question is unanswerable because it is unclear that "
        "'year of the cat in chinese zodiac' is contextually unique."
    )


def test_mismatched_ids():
    with pytest.raises(MismatchedIds):
        explain(make_presup("x", pid="pA"), make_result(pid="pB"))


def test_explanations_match_pattern(demo_questions):
    for question in demo_questions:
        for presup in generate_presuppositions(question):
            rendered = explain(presup, make_result(pid=presup.id))
            assert rendered is not None
            assert EXPLANATION_PATTERN.match(rendered.text), rendered.text


def test_none_iff_verifiable():
    presup = make_presup("the sun rotates")
    assert explain(presup, make_result(verifiable=True)) is None
    assert explain(presup, make_result(verifiable=False)) is not None


def _exp(pid, template):
    return Explanation(question_id="q0", text=f"text {pid}", presup_id=pid, template=template)


def test_select_primary_prefers_non_uniqueness():
    uniqueness = _exp("p0", TEMPLATE_UNCLEAR)
    existence = _exp("p1", TEMPLATE_COULD_NOT_VERIFY)
    presups = {
        "p0": make_presup("u", template_id="def-unique", pid="p0", spans=((0, 2),)),
        "p1": make_presup("e", template_id="def-exists", pid="p1", spans=((3, 5),)),
    }
    assert select_primary_explanation([uniqueness, existence], presups) is existence
    assert select_primary_explanation([existence, uniqueness], presups) is existence


def test_select_primary_singleton_and_empty():
    only = _exp("p0", TEMPLATE_COULD_NOT_VERIFY)
    assert select_primary_explanation([only]) is only
    assert select_primary_explanation([]) is None


def test_select_primary_earliest_span_breaks_ties():
    early = _exp("pA", TEMPLATE_COULD_NOT_VERIFY)
    late = _exp("pB", TEMPLATE_COULD_NOT_VERIFY)
    presups = {
        "pA": make_presup("a", pid="pA", spans=((1, 4),)),
        "pB": make_presup("b", pid="pB", spans=((5, 9),)),
    }
    assert select_primary_explanation([late, early], presups) is early


@given(st.permutations(list(range(5))))
def test_select_primary_order_independent(order):
    explanations = [
        _exp("p0", TEMPLATE_UNCLEAR),
        _exp("p1", TEMPLATE_COULD_NOT_VERIFY),
        _exp("p2", TEMPLATE_COULD_NOT_VERIFY),
        _exp("p3", TEMPLATE_UNCLEAR),
        _exp("p4", TEMPLATE_COULD_NOT_VERIFY),
    ]
    presups = {
        f"p{i}": make_presup(f"t{i}", pid=f"p{i}", spans=((i, i + 2),)) for i in range(5)
    }
    shuffled = [explanations[i] for i in order]
    assert select_primary_explanation(shuffled, presups) == select_primary_explanation(
        explanations, presups
    )
