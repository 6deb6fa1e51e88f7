import json
from pathlib import Path

from presup.cli import main

DATA_DIR = Path(__file__).resolve().parents[1] / "data"
DEMO_QUESTIONS = str(DATA_DIR / "demo" / "questions.jsonl")
DEMO_DOCUMENTS = str(DATA_DIR / "demo" / "documents.jsonl")
OVERLAP = DATA_DIR / "overlap"

OUTPUT_FILES = [
    "presuppositions.jsonl",
    "verification.jsonl",
    "explanations.jsonl",
    "augmented_flat.jsonl",
    "augmented_structured.jsonl",
]


def read_jsonl(path):
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def test_run_pipeline_on_demo_corpus(tmp_path):
    out = tmp_path / "out"
    rc = main(["run", "--questions", DEMO_QUESTIONS, "--documents", DEMO_DOCUMENTS,
               "--out", str(out), "--seed", "3"])
    assert rc == 0
    for name in OUTPUT_FILES:
        assert (out / name).exists(), name
    presups = read_jsonl(out / "presuppositions.jsonl")
    verification = read_jsonl(out / "verification.jsonl")
    assert len(presups) == len(verification)
    assert {p["presup_id"] for p in presups} == {v["presup_id"] for v in verification}


def test_run_pipeline_empty_questions(tmp_path):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    out = tmp_path / "out"
    rc = main(["run", "--questions", str(empty), "--documents", DEMO_DOCUMENTS, "--out", str(out)])
    assert rc == 0
    for name in OUTPUT_FILES:
        assert (out / name).read_text() == ""


def test_run_pipeline_missing_document(tmp_path, capsys):
    questions = tmp_path / "questions.jsonl"
    questions.write_text(
        json.dumps({"id": "q1", "doc_id": "d-nowhere", "text": "the cat", "ptb": "(NP (DT the) (NN cat))"})
        + "\n"
    )
    out = tmp_path / "out"
    rc = main(["run", "--questions", str(questions), "--documents", DEMO_DOCUMENTS, "--out", str(out)])
    assert rc != 0
    report = json.loads(capsys.readouterr().err.strip())
    assert report["error"] == "missing-document"
    assert "d-nowhere" in report["detail"]


def test_run_pipeline_reports_input_error_line(tmp_path, capsys):
    questions = tmp_path / "questions.jsonl"
    questions.write_text('{"id": "q1", "text": "the cat", "ptb": "(NP (DT the"}\n')
    out = tmp_path / "out"
    rc = main(["run", "--questions", str(questions), "--documents", DEMO_DOCUMENTS, "--out", str(out)])
    assert rc != 0
    report = json.loads(capsys.readouterr().err.strip())
    assert report["error"] == "input-format"
    assert report["line"] == 1


def test_generate_reproduces_golden_suite(tmp_path, golden_presuppositions):
    out_file = tmp_path / "presups.jsonl"
    rc = main(["generate", "--questions", DEMO_QUESTIONS, "--out", str(out_file)])
    assert rc == 0
    by_question = {}
    for record in read_jsonl(out_file):
        by_question.setdefault(record["question_id"], []).append(record["text"])
    for question_id, expected in golden_presuppositions.items():
        for text in expected:
            assert text in by_question[question_id]


def test_verify_then_eval_on_overlap_corpus(tmp_path, capsys):
    pred = tmp_path / "pred.jsonl"
    rc = main(["verify",
               "--presuppositions", str(OVERLAP / "presuppositions.jsonl"),
               "--questions", str(OVERLAP / "questions.jsonl"),
               "--documents", str(OVERLAP / "documents.jsonl"),
               "--out", str(pred)])
    assert rc == 0
    rc = main(["eval", "--predictions", str(pred), "--gold", str(OVERLAP / "gold.jsonl")])
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    assert report["accuracy"] == 1.0
    assert report["n"] == 30


def test_explain_command(tmp_path, golden_explanation):
    presups = tmp_path / "presups.jsonl"
    main(["generate", "--questions", DEMO_QUESTIONS, "--out", str(presups)])
    verification = tmp_path / "verification.jsonl"
    with open(verification, "w") as fh:
        for record in read_jsonl(presups):
            fh.write(json.dumps({"presup_id": record["presup_id"], "verifiable": False}) + "\n")
    out = tmp_path / "explanations.jsonl"
    rc = main(["explain", "--presuppositions", str(presups), "--verification", str(verification),
               "--out", str(out)])
    assert rc == 0
    texts = [r["text"] for r in read_jsonl(out)]
    assert golden_explanation["explanation"] in texts


def test_augment_command(tmp_path):
    presups = tmp_path / "presups.jsonl"
    main(["generate", "--questions", DEMO_QUESTIONS, "--out", str(presups)])
    verification = tmp_path / "verification.jsonl"
    main(["verify", "--presuppositions", str(presups), "--questions", DEMO_QUESTIONS,
          "--documents", DEMO_DOCUMENTS, "--out", str(verification)])
    out = tmp_path / "aug"
    rc = main(["augment", "--questions", DEMO_QUESTIONS, "--presuppositions", str(presups),
               "--verification", str(verification), "--documents", DEMO_DOCUMENTS,
               "--out", str(out)])
    assert rc == 0
    flat = read_jsonl(out / "augmented_flat.jsonl")
    structured = read_jsonl(out / "augmented_structured.jsonl")
    assert len(flat) == len(structured) == 13
    assert all(isinstance(i, int) for i in flat[0]["token_ids"])
    assert {slot["kind"] for s in structured for slot in s["global"]} <= {
        "question", "sentence", "presupposition"
    }


def test_export_pairs_command(tmp_path):
    out = tmp_path / "pairs.jsonl"
    rc = main(["export-pairs", "--questions", DEMO_QUESTIONS, "--documents", DEMO_DOCUMENTS,
               "--out", str(out), "--sample-n", "2", "--seed", "5"])
    assert rc == 0
    records = read_jsonl(out)
    assert records
    assert {"question_id", "presup_id", "presupposition", "sentence", "sentence_index"} <= set(records[0])


def test_split_keeps_question_groups(tmp_path):
    out_dev = tmp_path / "dev.jsonl"
    out_test = tmp_path / "test.jsonl"
    rc = main(["split", "--records", str(OVERLAP / "presuppositions.jsonl"),
               "--out-dev", str(out_dev), "--out-test", str(out_test), "--seed", "9"])
    assert rc == 0
    dev_questions = {r["question_id"] for r in read_jsonl(out_dev)}
    test_questions = {r["question_id"] for r in read_jsonl(out_test)}
    assert not dev_questions & test_questions
    assert len(read_jsonl(out_dev)) + len(read_jsonl(out_test)) == 30


def test_split_deterministic(tmp_path):
    paths = []
    for tag in ("a", "b"):
        out_dev = tmp_path / f"dev-{tag}.jsonl"
        out_test = tmp_path / f"test-{tag}.jsonl"
        main(["split", "--records", str(OVERLAP / "presuppositions.jsonl"),
              "--out-dev", str(out_dev), "--out-test", str(out_test), "--seed", "9"])
        paths.append((out_dev.read_bytes(), out_test.read_bytes()))
    assert paths[0] == paths[1]


def test_score_offline_round_trip(tmp_path, capsys):
    request_file = tmp_path / "requests.jsonl"
    request = {"pairs": [{"premise": "the sun rotates", "hypothesis": "the sun rotates"}],
               "mode": "independent"}
    request_file.write_text(json.dumps(request) + "\n")
    out_file = tmp_path / "responses.jsonl"
    rc = main(["score-offline", "--input", str(request_file), "--output", str(out_file)])
    assert rc == 0
    response = json.loads(out_file.read_text().strip())
    assert response["scores"][0]["entail_prob"] == 1.0


def test_scorer_env_var_fallback(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("PRESUP_SCORER_URL", "http://127.0.0.1:1")
    pred = tmp_path / "pred.jsonl"
    rc = main(["verify",
               "--presuppositions", str(OVERLAP / "presuppositions.jsonl"),
               "--questions", str(OVERLAP / "questions.jsonl"),
               "--documents", str(OVERLAP / "documents.jsonl"),
               "--out", str(pred)])
    assert rc != 0
    report = json.loads(capsys.readouterr().err.strip())
    assert report["error"] == "scorer-unavailable"


def test_eval_missing_gold_reported(tmp_path, capsys):
    pred = tmp_path / "pred.jsonl"
    pred.write_text(json.dumps({"id": "ghost", "verifiable": True}) + "\n")
    gold = tmp_path / "gold.jsonl"
    gold.write_text(json.dumps({"id": "other", "verifiable": True}) + "\n")
    rc = main(["eval", "--predictions", str(pred), "--gold", str(gold)])
    assert rc != 0
    report = json.loads(capsys.readouterr().err.strip())
    assert report["error"] == "missing-gold"
    assert "ghost" in report["detail"]
