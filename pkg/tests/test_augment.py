import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from presup.augment import (
    AnswerTypeLogits,
    OutOfRange,
    Vocabulary,
    classify_unanswerable,
    decode_flat,
    encode_flat,
    encode_structured,
    expand_mask,
    null_count_to_label,
)
from presup.presupgen import Presupposition, TriggerKind
from presup.treebank import Document, Question, Sentence, parse_ptb
from presup.verify import VerificationResult

TREE = parse_ptb("(NN x)")


def make_question(text, qid="q0"):
    return Question(id=qid, text=text, tree=TREE)


def make_pair(text, verifiable, pid="p0"):
    presup = Presupposition(
        id=pid,
        question_id="q0",
        text=text,
        kind=TriggerKind.WH_WORD,
        template_id="wh-what",
        source_spans=(),
    )
    result = VerificationResult(
        presup_id=pid, verifiable=verifiable, supporting=(), scores=(), strategy="sentence-nli"
    )
    return presup, result


def make_doc(sentence_texts, doc_id="d0"):
    return Document(
        id=doc_id, title=doc_id, sentences=tuple(Sentence(text=t) for t in sentence_texts)
    )


def test_encode_flat_matches_stated_layout():
    vocab = Vocabulary(
        {"w5": 5, "w6": 6, "w7": 7, "w8": 8, "w9": 9, "1": 3, "0": 4},
        pad_id=0,
        sep_id=2,
        unk_id=1,
    )
    question = make_question("w5 w6 w7")
    encoded = encode_flat(question, [make_pair("w8 w9", True)], vocab)
    assert list(encoded.token_ids) == [5, 6, 7, 2, 8, 9, 3]


def test_encode_flat_no_presuppositions():
    vocab = Vocabulary.build(["alpha beta"])
    question = make_question("alpha beta")
    encoded = encode_flat(question, [], vocab)
    assert list(encoded.token_ids) == vocab.encode("alpha beta")


def test_encode_flat_two_blocks_in_order():
    vocab = Vocabulary.build(["q tok", "first presup", "second presup"])
    question = make_question("q tok")
    pairs = [make_pair("first presup", True, "p0"), make_pair("second presup", False, "p1")]
    encoded = encode_flat(question, pairs, vocab)
    expected = (
        vocab.encode("q tok")
        + [vocab.sep_id]
        + vocab.encode("first presup")
        + [vocab.id_for("1")]
        + [vocab.sep_id]
        + vocab.encode("second presup")
        + [vocab.id_for("0")]
    )
    assert list(encoded.token_ids) == expected


def test_flat_round_trip_example():
    vocab = Vocabulary.build(["what do colors mean", "colors exist"])
    question = make_question("what do colors mean")
    pairs = [make_pair("colors exist", False)]
    question_text, blocks = decode_flat(encode_flat(question, pairs, vocab).token_ids, vocab)
    assert question_text == "what do colors mean"
    assert blocks == [("colors exist", 0)]


def test_encode_flat_truncates_whole_blocks(caplog):
    vocab = Vocabulary.build(["q q q", "a b c d", "x y"])
    question = make_question("q q q")
    pairs = [make_pair("a b c d", True, "p0"), make_pair("x y", False, "p1")]
    with caplog.at_level("WARNING"):
        encoded = encode_flat(question, pairs, vocab, max_tokens=10)
    # question(3) + block1(6) fits; block2(4) would overflow.
    assert len(encoded.token_ids) == 9
    _, blocks = decode_flat(encoded.token_ids, vocab)
    assert [label for _, label in blocks] == [1]
    assert any("truncated" in m for m in caplog.messages)


_WORDS = st.lists(st.sampled_from("red blue green cat dog sun moon".split()), min_size=1, max_size=6)


@settings(max_examples=200)
@given(
    question_words=_WORDS,
    presups=st.lists(st.tuples(_WORDS, st.booleans()), min_size=0, max_size=4),
)
def test_flat_round_trip_property(question_words, presups):
    texts = [" ".join(question_words)] + [" ".join(words) for words, _ in presups]
    vocab = Vocabulary.build(texts)
    question = make_question(texts[0])
    pairs = [
        make_pair(" ".join(words), verifiable, f"p{i}")
        for i, (words, verifiable) in enumerate(presups)
    ]
    decoded_q, decoded_blocks = decode_flat(encode_flat(question, pairs, vocab).token_ids, vocab)
    assert decoded_q == texts[0]
    assert decoded_blocks == [(" ".join(w), int(v)) for w, v in presups]


def test_structured_slot_layout():
    vocab = Vocabulary.build(["why sky blue", "sky is blue", "'sky' exists"])
    question = make_question("why sky blue")
    doc = make_doc(["sky is blue"])
    layout = encode_structured(question, [make_pair("'sky' exists", True)], doc, vocab)
    kinds = [slot.kind for slot in layout.global_tokens]
    assert kinds == ["question", "sentence", "presupposition"]
    assert layout.global_tokens[2].value == 1
    assert [seg.kind for seg in layout.segments] == kinds


def test_structured_zero_presuppositions():
    vocab = Vocabulary.build(["q", "s one", "s two"])
    layout = encode_structured(make_question("q"), [], make_doc(["s one", "s two"]), vocab)
    assert [slot.kind for slot in layout.global_tokens] == ["question", "sentence", "sentence"]
    allowed = expand_mask(layout)
    n_global = len(layout.global_tokens)
    for i in range(n_global):
        for j in range(n_global):
            assert (i, j) in allowed


def test_structured_presupposition_label_values():
    vocab = Vocabulary.build(["q", "s", "pa", "pb"])
    layout = encode_structured(
        make_question("q"),
        [make_pair("pa", True, "p0"), make_pair("pb", False, "p1")],
        make_doc(["s"]),
        vocab,
    )
    values = [slot.value for slot in layout.global_tokens if slot.kind == "presupposition"]
    assert values == [1, 0]


def _presup_ranges(layout):
    n_global = len(layout.global_tokens)
    cursor = n_global
    long_ranges = []
    for segment in layout.segments:
        long_ranges.append((cursor, cursor + len(segment.token_ids)))
        cursor += len(segment.token_ids)
    presup_global = {
        i for i, slot in enumerate(layout.global_tokens) if slot.kind == "presupposition"
    }
    presup_long = set()
    other_long = set()
    for idx, segment in enumerate(layout.segments):
        target = presup_long if segment.kind == "presupposition" else other_long
        target.update(range(*long_ranges[idx]))
    return presup_global, presup_long, other_long


def test_structured_presup_tokens_attend_only_to_presup_material():
    vocab = Vocabulary.build(["q a", "s b c", "p one", "p two"])
    layout = encode_structured(
        make_question("q a"),
        [make_pair("p one", True, "p0"), make_pair("p two", False, "p1")],
        make_doc(["s b c"]),
        vocab,
    )
    presup_global, presup_long, other_long = _presup_ranges(layout)
    non_presup_global = set(range(len(layout.global_tokens))) - presup_global
    allowed = expand_mask(layout)
    for i in presup_long:
        targets = {j for (src, j) in allowed if src == i}
        assert targets == presup_long | presup_global
        assert not targets & other_long
        assert not targets & non_presup_global


def test_structured_mask_soundness_random():
    import random

    rng = random.Random(7)
    vocab = Vocabulary.build(["a b c d e f g h"])
    for _ in range(50):
        question = make_question(" ".join(rng.choices("a b c d".split(), k=rng.randint(1, 5))))
        doc = make_doc(
            [" ".join(rng.choices("e f g".split(), k=rng.randint(1, 4))) for _ in range(rng.randint(1, 3))]
        )
        pairs = [
            make_pair(" ".join(rng.choices("g h".split(), k=rng.randint(1, 3))), rng.random() < 0.5, f"p{i}")
            for i in range(rng.randint(0, 3))
        ]
        layout = encode_structured(question, pairs, doc, vocab)
        presup_global, presup_long, other_long = _presup_ranges(layout)
        allowed = expand_mask(layout)
        forbidden = {
            (i, j)
            for (i, j) in allowed
            if i in presup_long and (j in other_long or (j < len(layout.global_tokens) and j not in presup_global))
        }
        assert forbidden == set()


def test_structured_global_cap_drops_presup_slots(caplog):
    vocab = Vocabulary.build(["q", "s", "p1", "p2", "p3"])
    pairs = [make_pair(f"p{i}", True, f"p{i}") for i in (1, 2, 3)]
    with caplog.at_level("WARNING"):
        layout = encode_structured(
            make_question("q"), pairs, make_doc(["s"]), vocab, max_global_tokens=4
        )
    assert len(layout.global_tokens) == 4
    assert sum(1 for s in layout.global_tokens if s.kind == "presupposition") == 2
    assert any("global cap" in m for m in caplog.messages)


def test_vocabulary_injective_and_unknowns():
    with pytest.raises(ValueError):
        Vocabulary({"a": 1, "b": 1}, pad_id=0, sep_id=2, unk_id=3)
    vocab = Vocabulary.build(["known words"])
    assert vocab.id_for("unseen") == vocab.unk_id


def test_classify_unanswerable_clear_cases():
    assert classify_unanswerable(AnswerTypeLogits(2.0, 0.4, 0.4, 0.4, 0.4))
    assert not classify_unanswerable(AnswerTypeLogits(1.0, 0.25, 0.25, 0.25, 0.25))
    assert classify_unanswerable(AnswerTypeLogits(-1.0, -0.75, -0.75, -0.75, -0.75))


def test_classify_unanswerable_strict_boundary():
    at_boundary = AnswerTypeLogits(1.0, 0.25, 0.25, 0.25, 0.25)
    assert not classify_unanswerable(at_boundary)
    assert classify_unanswerable(AnswerTypeLogits(1.0 + 1e-9, 0.25, 0.25, 0.25, 0.25))
    assert not classify_unanswerable(AnswerTypeLogits(1.0 - 1e-9, 0.25, 0.25, 0.25, 0.25))


def test_classify_unanswerable_not_shift_invariant():
    base = AnswerTypeLogits(2.0, 0.4, 0.4, 0.4, 0.4)
    shifted = AnswerTypeLogits(12.0, 10.4, 10.4, 10.4, 10.4)
    assert classify_unanswerable(base)
    assert not classify_unanswerable(shifted)


@given(
    st.floats(-5, 5),
    st.floats(-5, 5),
    st.floats(-5, 5),
    st.floats(-5, 5),
    st.floats(-5, 5),
    st.floats(0.001, 5),
)
def test_classify_unanswerable_monotone_in_unanswerable(u, l, s, y, n, bump):
    base = AnswerTypeLogits(u, l, s, y, n)
    bumped = AnswerTypeLogits(u + bump, l, s, y, n)
    if classify_unanswerable(base):
        assert classify_unanswerable(bumped)


def test_null_count_mapping():
    assert null_count_to_label(5, 5)
    assert null_count_to_label(4, 5)
    assert not null_count_to_label(3, 5)


def test_null_count_out_of_range():
    with pytest.raises(OutOfRange):
        null_count_to_label(6, 5)
    with pytest.raises(OutOfRange):
        null_count_to_label(-1, 5)
