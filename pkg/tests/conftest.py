import json
from pathlib import Path

import pytest

from presup.treebank import load_documents, load_questions

REPO_ROOT = Path(__file__).resolve().parents[1]
DATA_DIR = REPO_ROOT / "data"


@pytest.fixture(scope="session")
def demo_questions():
    return load_questions(DATA_DIR / "demo" / "questions.jsonl")


@pytest.fixture(scope="session")
def demo_documents():
    return load_documents(DATA_DIR / "demo" / "documents.jsonl")


@pytest.fixture(scope="session")
def demo_question_map(demo_questions):
    return {q.id: q for q in demo_questions}


@pytest.fixture(scope="session")
def golden_presuppositions():
    with open(DATA_DIR / "golden" / "expected_presuppositions.json", encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def golden_explanation():
    with open(DATA_DIR / "golden" / "expected_explanation.json", encoding="utf-8") as fh:
        return json.load(fh)
