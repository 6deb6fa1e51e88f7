"""Penn-Treebank-style bracketed constituency trees and corpus records.

Trees are immutable: children are tuples, leaves carry a surface token, and
every node carries a half-open ``[start, end)`` token span assigned during
parsing. Serialization is canonical (single space between elements, no
whitespace inside labels), so ``serialize(parse_ptb(s)) == s`` holds for any
canonical bracketing ``s``.

Questions and documents are ingested from JSONL, one object per line:

    {"id": ..., "text": ..., "ptb": ..., "doc_id": ...?}
    {"id": ..., "title": ..., "sentences": [{"text": ..., "ptb": ...?}, ...]}
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path as FsPath
from typing import Callable, Iterable, Iterator

# A node reference: child indices walked from the root.
NodePath = tuple[int, ...]


class TreebankError(ValueError):
    """Base class for bracketed-tree and corpus-format errors."""


class UnbalancedBrackets(TreebankError):
    def __init__(self, position: int, message: str = "unbalanced brackets"):
        super().__init__(f"{message} at position {position}")
        self.position = position


class EmptyLabel(TreebankError):
    pass


class EmptyTree(TreebankError):
    pass


class EmptyNode(TreebankError):
    """A labeled node with neither children nor a token, e.g. ``(NP)``."""


class InputFormatError(TreebankError):
    """A JSONL corpus record that cannot be ingested; carries the line number."""

    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line
        self.detail = message


@dataclass(frozen=True)
class ParseTree:
    """One constituency-tree node. A node has a token iff it has no children."""

    label: str
    children: tuple["ParseTree", ...] = ()
    token: str | None = None
    span: tuple[int, int] = (0, 0)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def leaves(self) -> list["ParseTree"]:
        if self.is_leaf:
            return [self]
        out: list[ParseTree] = []
        for child in self.children:
            out.extend(child.leaves())
        return out

    def yield_tokens(self) -> list[str]:
        return [leaf.token or "" for leaf in self.leaves()]


def parse_ptb(text: str) -> ParseTree:
    """Parse a bracketed tree, assigning spans by left-to-right leaf order."""
    i, n = _skip_ws(text, 0), len(text)
    if i >= n:
        raise EmptyTree("empty input")
    tree, i = _parse_node(text, i, 0)
    i = _skip_ws(text, i)
    if i < n:
        raise UnbalancedBrackets(i, "trailing content")
    return tree


def _skip_ws(s: str, i: int) -> int:
    while i < len(s) and s[i].isspace():
        i += 1
    return i


def _read_atom(s: str, i: int) -> tuple[str, int]:
    j = i
    while j < len(s) and s[j] not in "()" and not s[j].isspace():
        j += 1
    return s[i:j], j


def _parse_node(s: str, i: int, next_leaf: int) -> tuple[ParseTree, int]:
    if s[i] != "(":
        raise UnbalancedBrackets(i, "expected '('")
    i = _skip_ws(s, i + 1)
    label, i = _read_atom(s, i)
    if not label:
        raise EmptyLabel(f"missing node label at position {i}")
    i = _skip_ws(s, i)

    children: list[ParseTree] = []
    token: str | None = None
    while True:
        if i >= len(s):
            raise UnbalancedBrackets(len(s), "unclosed bracket at end-of-input")
        ch = s[i]
        if ch == ")":
            i += 1
            break
        if ch == "(":
            if token is not None:
                raise UnbalancedBrackets(i, "mixed token and subtree content")
            child, i = _parse_node(s, i, next_leaf)
            next_leaf = child.span[1]
            children.append(child)
        else:
            atom, i = _read_atom(s, i)
            if children or token is not None:
                raise UnbalancedBrackets(i, "multiple tokens under one label")
            token = atom
        i = _skip_ws(s, i)

    if token is not None:
        return ParseTree(label, (), token, (next_leaf, next_leaf + 1)), i
    if not children:
        raise EmptyNode(f"node '{label}' has no children and no token")
    span = (children[0].span[0], children[-1].span[1])
    return ParseTree(label, tuple(children), None, span), i


def serialize(tree: ParseTree) -> str:
    """Canonical bracketing: inverse of parse_ptb on canonical input."""
    if tree.is_leaf:
        return f"({tree.label} {tree.token})"
    return "(" + tree.label + " " + " ".join(serialize(c) for c in tree.children) + ")"


def yield_text(tree: ParseTree) -> str:
    """Leaf tokens joined with single spaces."""
    return " ".join(tree.yield_tokens())


# Clitic tokens that a tokenized parse may carry as separate leaves; rendered
# strings re-attach them to the preceding token.
CLITICS = {"'s", "'", "n't", "'re", "'ve", "'ll", "'d", "'m"}


def detokenize(tokens: Iterable[str]) -> str:
    """Join tokens with spaces, attaching clitic tokens to their host."""
    out: list[str] = []
    for tok in tokens:
        if out and tok in CLITICS:
            out[-1] = out[-1] + tok
        else:
            out.append(tok)
    return " ".join(out)


def iter_nodes(tree: ParseTree) -> Iterator[tuple[NodePath, ParseTree]]:
    """Pre-order traversal yielding (path, node) pairs."""
    stack: list[tuple[NodePath, ParseTree]] = [((), tree)]
    while stack:
        path, node = stack.pop()
        yield path, node
        for idx in range(len(node.children) - 1, -1, -1):
            stack.append((path + (idx,), node.children[idx]))


def node_at(tree: ParseTree, path: NodePath) -> ParseTree:
    node = tree
    for idx in path:
        node = node.children[idx]
    return node


def find_nodes(tree: ParseTree, predicate: Callable[[ParseTree], bool]) -> list[NodePath]:
    """Paths of all nodes satisfying the predicate, in pre-order."""
    return [path for path, node in iter_nodes(tree) if predicate(node)]


@dataclass(frozen=True)
class Question:
    id: str
    text: str
    tree: ParseTree
    doc_id: str | None = None


@dataclass(frozen=True)
class Sentence:
    text: str
    tree: ParseTree | None = None


@dataclass(frozen=True)
class Document:
    id: str
    title: str
    sentences: tuple[Sentence, ...]


def normalize_question_text(text: str, *, lowercase: bool = False) -> str:
    """Strip surrounding whitespace and a terminal question mark; optionally
    lowercase. Inner whitespace runs collapse to single spaces."""
    text = " ".join(text.split())
    if text.endswith("?"):
        text = text[:-1].rstrip()
    return text.lower() if lowercase else text


def _iter_jsonl(path: str | FsPath) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputFormatError(str(path), lineno, f"invalid JSON: {exc}") from exc
            if not isinstance(record, dict):
                raise InputFormatError(str(path), lineno, "record is not a JSON object")
            yield lineno, record


def load_questions(path: str | FsPath, *, lowercase: bool = False) -> list[Question]:
    """Load question records, validating that the tree yield matches the text."""
    questions: list[Question] = []
    for lineno, record in _iter_jsonl(path):
        try:
            text = normalize_question_text(str(record["text"]), lowercase=lowercase)
            tree = parse_ptb(str(record["ptb"]))
            question = Question(
                id=str(record["id"]),
                text=text,
                tree=tree,
                doc_id=str(record["doc_id"]) if record.get("doc_id") is not None else None,
            )
        except KeyError as exc:
            raise InputFormatError(str(path), lineno, f"missing field {exc}") from exc
        except TreebankError as exc:
            raise InputFormatError(str(path), lineno, f"bad parse: {exc}") from exc
        if yield_text(question.tree) != question.text:
            raise InputFormatError(
                str(path),
                lineno,
                f"tree yield {yield_text(question.tree)!r} != text {question.text!r}",
            )
        questions.append(question)
    return questions


def load_documents(path: str | FsPath) -> dict[str, Document]:
    """Load documents keyed by id. Sentence parses are optional but, when
    present, must yield the sentence text."""
    documents: dict[str, Document] = {}
    for lineno, record in _iter_jsonl(path):
        try:
            sentences = []
            raw_sentences = record["sentences"]
            if not raw_sentences:
                raise InputFormatError(str(path), lineno, "document has no sentences")
            for raw in raw_sentences:
                tree = parse_ptb(str(raw["ptb"])) if raw.get("ptb") else None
                sentence = Sentence(text=str(raw["text"]), tree=tree)
                if tree is not None and yield_text(tree) != sentence.text:
                    raise InputFormatError(
                        str(path), lineno, f"sentence parse yield != text: {sentence.text!r}"
                    )
                sentences.append(sentence)
            doc = Document(
                id=str(record["id"]),
                title=str(record.get("title", "")),
                sentences=tuple(sentences),
            )
        except KeyError as exc:
            raise InputFormatError(str(path), lineno, f"missing field {exc}") from exc
        except TreebankError as exc:
            if isinstance(exc, InputFormatError):
                raise
            raise InputFormatError(str(path), lineno, f"bad parse: {exc}") from exc
        documents[doc.id] = doc
    return documents
