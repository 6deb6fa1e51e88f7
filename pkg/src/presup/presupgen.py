"""Trigger detection and templatic presupposition generation.

Six trigger classes are detected on a question's constituency parse:
question words, definite articles, factive verbs, possessive 's, temporal
adjuncts, and counterfactual conditionals. Each trigger carries the tree
constituents its template needs; generation renders one or two strings per
trigger by slotting constituent yields into fixed templates, declarativizing
the clause body for question-word triggers.

All functions are pure; questions can be processed in parallel.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from importlib import resources

from . import inflect
from .treebank import (
    NodePath,
    ParseTree,
    Question,
    detokenize,
    iter_nodes,
    node_at,
)

log = logging.getLogger(__name__)

WH_WORDS = {"who", "what", "where", "when", "why", "how", "which"}
AUX_TAGS = {"MD", "VBZ", "VBD", "VBP"}
DO_FORMS = {"do", "does", "did"}
CLAUSE_LABELS = {"SQ", "S"}
TEMPORAL_SUBORDINATORS = {"when", "while", "before", "after"}
TEMPORAL_PREPOSITIONS = {"during", "before", "after"}
COUNTERFACTUAL_MODALS = {"would", "could"}

# Templates keyed by question word; "{}" receives the declarativized body.
WH_TEMPLATES: dict[str, list[tuple[str, str]]] = {
    "who": [("wh-who", "there is someone that {}")],
    "which": [("wh-which", "some {}")],
    "where": [("wh-where", "there is some place that {}")],
    "what": [("wh-what", "there is something that {}")],
    "when": [("wh-when", "there is some point in time that {}")],
    "how": [("wh-how-bare", "{}"), ("wh-how-way", "there is some way that {}")],
    "why": [("wh-why-bare", "{}"), ("wh-why-reason", "there is some reason that {}")],
}

DEFINITE_TEMPLATES = [("def-exists", "'{}' exists"), ("def-unique", "'{}' is contextually unique")]
POSSESSIVE_TEMPLATE = ("poss-has", "'{}' has '{}'")
FACTIVE_TEMPLATE = ("factive-clause", "{}")
TEMPORAL_TEMPLATE = ("temporal-clause", "{}")
COUNTERFACTUAL_TEMPLATE = ("counterfactual-neg", "it is not true that {}")

UNIQUENESS_TEMPLATE_ID = "def-unique"


class TriggerKind(str, Enum):
    WH_WORD = "wh-word"
    DEFINITE_ARTICLE = "definite-article"
    FACTIVE_VERB = "factive-verb"
    POSSESSIVE = "possessive"
    TEMPORAL_ADJUNCT = "temporal-adjunct"
    COUNTERFACTUAL = "counterfactual"


class NoSubjectFound(ValueError):
    """Clause structure unrecognized during declarativization; the affected
    trigger is skipped, not fatal."""


@dataclass(frozen=True)
class TriggerMatch:
    kind: TriggerKind
    anchor: NodePath
    payload: dict[str, tuple[NodePath, ...]]
    wh_word: str | None = None


@dataclass(frozen=True)
class Presupposition:
    id: str
    question_id: str
    text: str
    kind: TriggerKind
    template_id: str
    source_spans: tuple[tuple[int, int], ...]

    def to_json(self) -> dict:
        return {
            "presup_id": self.id,
            "question_id": self.question_id,
            "text": self.text,
            "kind": self.kind.value,
            "template_id": self.template_id,
            "source_spans": [list(span) for span in self.source_spans],
        }


class FactiveLexicon:
    """Verb lemmas whose clausal complement is presupposed true.

    Lookup takes an inflected verb token (auxiliaries already stripped by the
    detector) plus an optional particle for phrasal entries like "find out".
    """

    def __init__(self, lemmas: set[str] | frozenset[str]):
        if not lemmas:
            raise ValueError("factive lexicon must be non-empty")
        self.lemmas = frozenset(lemma.lower() for lemma in lemmas)

    @classmethod
    def load(cls, path: str | None = None) -> "FactiveLexicon":
        """Load one-lemma-per-line text ('#' comments); defaults to the
        packaged seed lexicon."""
        if path is None:
            text = resources.files(__package__).joinpath("data/factive_verbs.txt").read_text("utf-8")
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        lemmas = set()
        for line in text.splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                lemmas.add(line)
        return cls(lemmas)

    def matches(self, verb_token: str, particle: str | None = None) -> bool:
        for lemma in inflect.lemma_candidates(verb_token):
            if particle and f"{lemma} {particle.lower()}" in self.lemmas:
                return True
            if lemma in self.lemmas:
                return True
        return False


def default_lexicon() -> FactiveLexicon:
    return FactiveLexicon.load()


def _first_leaf(node: ParseTree) -> ParseTree:
    while node.children:
        node = node.children[0]
    return node


def _leftmost_leaf_path(node: ParseTree, path: NodePath) -> NodePath:
    while node.children:
        path = path + (0,)
        node = node.children[0]
    return path


def _first_wh_leaf(phrase: ParseTree, path: NodePath) -> tuple[NodePath, ParseTree] | None:
    for sub_path, node in iter_nodes(phrase):
        if node.is_leaf and (node.token or "").lower() in WH_WORDS:
            return path + sub_path, node
    return None


def detect_triggers(
    question: Question,
    lexicon: FactiveLexicon | None = None,
    *,
    declarative: bool = False,
    projection_guard: bool = False,
    skip_proper_definites: bool = True,
) -> list[TriggerMatch]:
    """All trigger matches in document order.

    ``declarative`` disables question-word triggers (used when mining
    presuppositions from document sentences). ``projection_guard`` suppresses
    triggers embedded under a non-factive clause-taking verb's complement;
    it defaults off, replicating the base generator's over-generation there.
    ``skip_proper_definites`` drops "the" + single proper noun ("the US").
    """
    lexicon = lexicon or default_lexicon()
    tree = question.tree
    matches: list[TriggerMatch] = []

    if not declarative:
        matches.extend(_detect_wh(tree))
    matches.extend(_detect_definites(tree, skip_proper_definites))
    matches.extend(_detect_possessives(tree))
    matches.extend(_detect_factives(tree, lexicon))
    matches.extend(_detect_temporal(tree))
    matches.extend(_detect_counterfactual(tree))

    if projection_guard:
        matches = [m for m in matches if not _under_nonfactive_complement(tree, m.anchor, lexicon)]

    def anchor_start(match: TriggerMatch) -> tuple[int, str]:
        return (node_at(tree, match.anchor).span[0], match.kind.value)

    return sorted(matches, key=anchor_start)


def _detect_wh(tree: ParseTree) -> list[TriggerMatch]:
    matches = []
    for path, node in iter_nodes(tree):
        if node.label != "SBARQ":
            continue
        for idx, child in enumerate(node.children):
            if not child.label.startswith("WH"):
                continue
            found = _first_wh_leaf(child, path + (idx,))
            if found is None:
                continue
            wh_path, wh_leaf = found
            body_path = None
            for jdx in range(idx + 1, len(node.children)):
                if node.children[jdx].label in CLAUSE_LABELS:
                    body_path = path + (jdx,)
                    break
            if body_path is None:
                log.warning("wh-phrase %r has no clause body; skipped", yield_of(child))
                continue
            # Residue of the wh-phrase beyond the wh word itself ("which
            # philosopher" -> "philosopher"); consumed by the which-template.
            rest = tuple(
                path + (idx, cdx)
                for cdx, sub in enumerate(child.children)
                if sub.span[0] >= wh_leaf.span[1]
            )
            matches.append(
                TriggerMatch(
                    kind=TriggerKind.WH_WORD,
                    anchor=wh_path,
                    payload={"body": (body_path,), "wh_rest": rest},
                    wh_word=(wh_leaf.token or "").lower(),
                )
            )
    return matches


def _detect_definites(tree: ParseTree, skip_proper: bool) -> list[TriggerMatch]:
    matches = []
    for path, node in iter_nodes(tree):
        if not (node.is_leaf and node.label == "DT" and (node.token or "").lower() == "the"):
            continue
        if not path:
            continue
        base_path = path[:-1]
        base = node_at(tree, base_path)
        if not base.label.startswith("NP"):
            continue
        if skip_proper:
            rest = [c for cdx, c in enumerate(base.children) if cdx != path[-1]]
            if len(rest) == 1 and rest[0].label in {"NNP", "NNPS"}:
                continue
        np_path = _maximal_np(tree, base_path)
        matches.append(
            TriggerMatch(
                kind=TriggerKind.DEFINITE_ARTICLE,
                anchor=path,
                payload={"np": (np_path,)},
            )
        )
    return matches


def _maximal_np(tree: ParseTree, np_path: NodePath) -> NodePath:
    """Climb to the largest NP headed by the one at ``np_path``, keeping PP
    modifiers but stopping before a level that attaches a relative clause."""
    while np_path:
        parent_path = np_path[:-1]
        parent = node_at(tree, parent_path)
        if not parent.label.startswith("NP"):
            break
        if np_path[-1] != 0:
            break
        if any(child.label == "SBAR" for child in parent.children):
            break
        np_path = parent_path
    return np_path


def _detect_possessives(tree: ParseTree) -> list[TriggerMatch]:
    matches = []
    for path, node in iter_nodes(tree):
        if not (node.is_leaf and node.label == "POS"):
            continue
        if len(path) < 2:
            continue
        owner_path = path[:-1]
        owner = node_at(tree, owner_path)
        outer = node_at(tree, owner_path[:-1])
        if not owner.label.startswith("NP") or not outer.label.startswith("NP"):
            continue
        owner_idx = owner_path[-1]
        if owner_idx >= len(outer.children) - 1:
            continue
        possessor = tuple(
            owner_path + (cdx,) for cdx, child in enumerate(owner.children) if child.label != "POS"
        )
        possessee = tuple(
            owner_path[:-1] + (cdx,) for cdx in range(owner_idx + 1, len(outer.children))
        )
        if not possessor or not possessee:
            continue
        matches.append(
            TriggerMatch(
                kind=TriggerKind.POSSESSIVE,
                anchor=path,
                payload={"possessor": possessor, "possessee": possessee},
            )
        )
    return matches


def _particle_after(parent: ParseTree, verb_idx: int) -> str | None:
    for child in parent.children[verb_idx + 1 :]:
        if child.label == "PRT" and child.children:
            leaf = _first_leaf(child)
            return leaf.token
        if child.label == "RP" and child.is_leaf:
            return child.token
    return None


def _detect_factives(tree: ParseTree, lexicon: FactiveLexicon) -> list[TriggerMatch]:
    matches = []
    for path, node in iter_nodes(tree):
        if not node.label.startswith("VP"):
            continue
        for idx, child in enumerate(node.children):
            if not (child.is_leaf and child.label.startswith("VB")):
                continue
            particle = _particle_after(node, idx)
            if not lexicon.matches(child.token or "", particle):
                continue
            clause = _complement_clause(tree, path, node, idx)
            if clause is None:
                continue
            matches.append(
                TriggerMatch(
                    kind=TriggerKind.FACTIVE_VERB,
                    anchor=path + (idx,),
                    payload={"clause": (clause,)},
                )
            )
    return matches


def _complement_clause(
    tree: ParseTree, vp_path: NodePath, vp: ParseTree, verb_idx: int
) -> NodePath | None:
    """The S inside an SBAR (or bare S) complement following the verb, with
    any complementizer stripped."""
    for jdx in range(verb_idx + 1, len(vp.children)):
        sibling = vp.children[jdx]
        if sibling.label == "SBAR":
            for cdx, part in enumerate(sibling.children):
                if part.label == "S":
                    return vp_path + (jdx, cdx)
            return None
        if sibling.label == "S":
            return vp_path + (jdx,)
    return None


def _detect_temporal(tree: ParseTree) -> list[TriggerMatch]:
    matches = []
    for path, node in iter_nodes(tree):
        if node.label == "SBAR" and node.children:
            head = _first_leaf(node.children[0])
            if (head.token or "").lower() not in TEMPORAL_SUBORDINATORS:
                continue
            for cdx, child in enumerate(node.children):
                if child.label == "S":
                    anchor = _leftmost_leaf_path(node.children[0], path + (0,))
                    matches.append(
                        TriggerMatch(
                            kind=TriggerKind.TEMPORAL_ADJUNCT,
                            anchor=anchor,
                            payload={"clause": (path + (cdx,),)},
                        )
                    )
                    break
        elif node.label == "PP" and node.children:
            head = node.children[0]
            if not (head.is_leaf and head.label in {"IN", "TO"}):
                continue
            if (head.token or "").lower() not in TEMPORAL_PREPOSITIONS:
                continue
            for cdx, child in enumerate(node.children):
                if child.label.startswith("NP"):
                    matches.append(
                        TriggerMatch(
                            kind=TriggerKind.TEMPORAL_ADJUNCT,
                            anchor=path + (0,),
                            payload={"clause": (path + (cdx,),)},
                        )
                    )
                    break
    return matches


def _detect_counterfactual(tree: ParseTree) -> list[TriggerMatch]:
    matches = []
    for path, node in iter_nodes(tree):
        if node.label != "SBAR" or not node.children:
            continue
        head = node.children[0]
        if not (head.is_leaf and (head.token or "").lower() == "if"):
            continue
        clause_path = None
        for cdx, child in enumerate(node.children):
            if child.label == "S":
                clause_path = path + (cdx,)
                break
        if clause_path is None:
            continue
        clause = node_at(tree, clause_path)
        subject_path = None
        for cdx, child in enumerate(clause.children):
            if child.label.startswith("NP"):
                subject_path = clause_path + (cdx,)
                break
        if subject_path is None:
            continue
        if not _clause_is_past(clause):
            continue
        if not _matrix_has_modal(tree, path):
            continue
        matches.append(
            TriggerMatch(
                kind=TriggerKind.COUNTERFACTUAL,
                anchor=path + (0,),
                payload={"clause": (clause_path,), "subject": (subject_path,)},
            )
        )
    return matches


def _clause_is_past(clause: ParseTree) -> bool:
    for leaf in clause.leaves():
        if leaf.label == "VBD":
            return True
    return False


def _matrix_has_modal(tree: ParseTree, sbar_path: NodePath) -> bool:
    sbar = node_at(tree, sbar_path)
    lo, hi = sbar.span
    for leaf in tree.leaves():
        if leaf.label == "MD" and (leaf.token or "").lower() in COUNTERFACTUAL_MODALS:
            if leaf.span[0] < lo or leaf.span[0] >= hi:
                return True
    return False


def _under_nonfactive_complement(
    tree: ParseTree, anchor: NodePath, lexicon: FactiveLexicon
) -> bool:
    """True when the anchor sits inside an SBAR complement of a clause-taking
    verb that is not in the factive lexicon."""
    for depth in range(1, len(anchor)):
        prefix = anchor[:depth]
        node = node_at(tree, prefix)
        if node.label != "SBAR" or len(prefix) < 1:
            continue
        parent = node_at(tree, prefix[:-1])
        if not parent.label.startswith("VP"):
            continue
        sbar_idx = prefix[-1]
        verb = None
        for child in parent.children[:sbar_idx]:
            if child.is_leaf and child.label.startswith("VB"):
                verb = child
        if verb is None:
            continue
        particle = None
        if not lexicon.matches(verb.token or "", particle):
            return True
    return False


def yield_of(node: ParseTree) -> str:
    return detokenize(node.yield_tokens())


def declarativize(clause: ParseTree) -> list[str]:
    """Turn the body of an interrogative clause into declarative token order.

    Subject-aux inversion is undone; do-support auxiliaries are deleted with
    the main verb re-inflected (past for "did", third singular for "does").
    Clauses with no direct NP child are subject extractions and pass through
    unchanged. Raises NoSubjectFound when an auxiliary has no following NP.
    """
    children = [c for c in clause.children if c.label not in {",", ".", "?"}]
    if not children:
        raise NoSubjectFound("empty clause")
    if not any(c.label.startswith("NP") for c in children):
        # Subject extraction: the gap is filled by the wh-phrase, so the body
        # is already in declarative order ("sings ...", "would have been ...").
        if children[0].label in AUX_TAGS and not all(
            c.label.startswith("VP") for c in children[1:]
        ):
            raise NoSubjectFound(f"auxiliary {children[0].token!r} with no subject NP")
        return [tok for c in children for tok in c.yield_tokens()]
    if children[0].label not in AUX_TAGS or not children[0].is_leaf:
        return [tok for c in children for tok in c.yield_tokens()]

    aux = children[0]
    subj_idx = None
    for idx in range(1, len(children)):
        if children[idx].label.startswith("NP"):
            subj_idx = idx
            break
    if subj_idx is None:
        raise NoSubjectFound(f"no subject NP after auxiliary {aux.token!r}")

    subject = children[subj_idx]
    mid = children[1:subj_idx]
    rest = children[subj_idx + 1 :]

    if (aux.token or "").lower() in DO_FORMS and not mid:
        rest_tokens = _reinflected_tokens(rest, (aux.token or "").lower())
        return subject.yield_tokens() + rest_tokens

    mid_tokens = [tok for c in mid for tok in c.yield_tokens()]
    rest_tokens = [tok for c in rest for tok in c.yield_tokens()]
    return subject.yield_tokens() + [aux.token or ""] + mid_tokens + rest_tokens


def _reinflected_tokens(rest: list[ParseTree], do_form: str) -> list[str]:
    target_span = None
    replacement = None
    for node in rest:
        if not node.label.startswith("VP"):
            continue
        for leaf in node.leaves():
            if leaf.label.startswith("VB"):
                verb = leaf.token or ""
                if do_form == "did":
                    replacement = inflect.past_tense(verb)
                elif do_form == "does":
                    replacement = inflect.third_singular(verb)
                else:
                    replacement = verb
                target_span = leaf.span
                break
        if target_span:
            break
    tokens = []
    for node in rest:
        for leaf in node.leaves():
            if target_span and leaf.span == target_span:
                tokens.append(replacement or leaf.token or "")
            else:
                tokens.append(leaf.token or "")
    return tokens


def _counterfactual_tokens(clause: ParseTree) -> list[str]:
    """Clause tokens with past-perfect shifted to simple past: "had won" ->
    "won". Simple-past antecedents pass through unchanged."""
    leaves = clause.leaves()
    tokens: list[str] = []
    skip_next_span = None
    for idx, leaf in enumerate(leaves):
        if skip_next_span and leaf.span == skip_next_span:
            skip_next_span = None
            continue
        if (
            leaf.label == "VBD"
            and (leaf.token or "").lower() == "had"
            and idx + 1 < len(leaves)
            and leaves[idx + 1].label == "VBN"
        ):
            participle = leaves[idx + 1].token or ""
            tokens.append(inflect.participle_to_past(participle))
            skip_next_span = leaves[idx + 1].span
            continue
        tokens.append(leaf.token or "")
    return tokens


def generate(question: Question, matches: list[TriggerMatch]) -> list[Presupposition]:
    """Render template strings for every match; one match may yield several
    presuppositions (definite article, how/why). Matches whose clause body
    cannot be declarativized are skipped with a warning."""
    tree = question.tree
    out: list[Presupposition] = []
    for match in matches:
        try:
            rendered = _render(tree, match)
        except NoSubjectFound as exc:
            log.warning("question %s: %s; trigger %s skipped", question.id, exc, match.kind.value)
            continue
        spans = _payload_spans(tree, match)
        for template_id, text in rendered:
            out.append(
                Presupposition(
                    id=f"{question.id}:p{len(out)}",
                    question_id=question.id,
                    text=text,
                    kind=match.kind,
                    template_id=template_id,
                    source_spans=spans,
                )
            )
    return out


def generate_presuppositions(
    question: Question,
    lexicon: FactiveLexicon | None = None,
    **detect_kwargs,
) -> list[Presupposition]:
    return generate(question, detect_triggers(question, lexicon, **detect_kwargs))


def _payload_spans(tree: ParseTree, match: TriggerMatch) -> tuple[tuple[int, int], ...]:
    spans = []
    for paths in match.payload.values():
        for path in paths:
            spans.append(node_at(tree, path).span)
    return tuple(sorted(set(spans)))


def _render(tree: ParseTree, match: TriggerMatch) -> list[tuple[str, str]]:
    if match.kind is TriggerKind.WH_WORD:
        body = node_at(tree, match.payload["body"][0])
        tokens = declarativize(body)
        if match.wh_word == "which":
            rest_tokens = [
                tok for path in match.payload["wh_rest"] for tok in node_at(tree, path).yield_tokens()
            ]
            tokens = rest_tokens + tokens
        slot = detokenize(tokens)
        return [(tid, template.format(slot)) for tid, template in WH_TEMPLATES[match.wh_word or ""]]

    if match.kind is TriggerKind.DEFINITE_ARTICLE:
        np = node_at(tree, match.payload["np"][0])
        anchor = node_at(tree, match.anchor)
        offset = anchor.span[1] - np.span[0]
        slot_tokens = np.yield_tokens()[offset:]
        if not slot_tokens:
            return []
        slot = detokenize(slot_tokens)
        return [(tid, template.format(slot)) for tid, template in DEFINITE_TEMPLATES]

    if match.kind is TriggerKind.POSSESSIVE:
        possessor = detokenize(
            [tok for path in match.payload["possessor"] for tok in node_at(tree, path).yield_tokens()]
        )
        possessee = detokenize(
            [tok for path in match.payload["possessee"] for tok in node_at(tree, path).yield_tokens()]
        )
        tid, template = POSSESSIVE_TEMPLATE
        return [(tid, template.format(possessor, possessee))]

    if match.kind is TriggerKind.FACTIVE_VERB:
        clause = node_at(tree, match.payload["clause"][0])
        tid, template = FACTIVE_TEMPLATE
        return [(tid, template.format(yield_of(clause)))]

    if match.kind is TriggerKind.TEMPORAL_ADJUNCT:
        clause = node_at(tree, match.payload["clause"][0])
        tid, template = TEMPORAL_TEMPLATE
        return [(tid, template.format(yield_of(clause)))]

    if match.kind is TriggerKind.COUNTERFACTUAL:
        clause = node_at(tree, match.payload["clause"][0])
        tid, template = COUNTERFACTUAL_TEMPLATE
        return [(tid, template.format(detokenize(_counterfactual_tokens(clause))))]

    raise AssertionError(f"unhandled trigger kind {match.kind}")
