"""Small English verb morphology: past tense, third-person singular, and
lemma candidates for lexicon lookup.

An irregular-verb table ships as package data; everything else falls back to
"-ed"/"-s" style suffix rules. Coverage is intentionally shallow: generation
templates only ever re-inflect a bare verb after auxiliary deletion or shift a
past participle down to simple past.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

VOWELS = "aeiou"

# Suppletive third-person-singular forms the suffix rules cannot produce.
THIRD_SINGULAR_IRREGULAR = {"be": "is", "have": "has"}


@lru_cache(maxsize=1)
def _irregular_table() -> dict[str, tuple[str, str]]:
    table: dict[str, tuple[str, str]] = {}
    data = resources.files(__package__).joinpath("data/irregular_verbs.txt")
    for line in data.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        lemma, past, participle = line.split("\t")
        table[lemma] = (past, participle)
    return table


@lru_cache(maxsize=1)
def _inflected_to_lemma() -> dict[str, str]:
    inverse: dict[str, str] = {}
    for lemma, (past, participle) in _irregular_table().items():
        inverse.setdefault(past, lemma)
        inverse.setdefault(participle, lemma)
    return inverse


def _doubles_final_consonant(verb: str) -> bool:
    # One-syllable CVC endings double before -ed ("stop" -> "stopped").
    if len(verb) < 3 or verb[-1] in VOWELS + "wxy" or verb[-2] not in VOWELS:
        return False
    return verb[-3] not in VOWELS


def past_tense(verb: str) -> str:
    verb = verb.lower()
    irregular = _irregular_table().get(verb)
    if irregular:
        return irregular[0]
    if verb.endswith("e"):
        return verb + "d"
    if verb.endswith("y") and len(verb) > 1 and verb[-2] not in VOWELS:
        return verb[:-1] + "ied"
    if _doubles_final_consonant(verb):
        return verb + verb[-1] + "ed"
    return verb + "ed"


def third_singular(verb: str) -> str:
    verb = verb.lower()
    if verb in THIRD_SINGULAR_IRREGULAR:
        return THIRD_SINGULAR_IRREGULAR[verb]
    if verb.endswith(("s", "sh", "ch", "x", "z", "o")):
        return verb + "es"
    if verb.endswith("y") and len(verb) > 1 and verb[-2] not in VOWELS:
        return verb[:-1] + "ies"
    return verb + "s"


def participle_to_past(participle: str) -> str:
    """Map a past participle to simple past ("gone" -> "went"). Unknown forms
    are returned unchanged, which is correct for regular "-ed" participles."""
    lemma = _inflected_to_lemma().get(participle.lower())
    if lemma:
        return past_tense(lemma)
    return participle


def lemma_candidates(token: str) -> list[str]:
    """Possible lemmas for an inflected verb token, most specific first."""
    token = token.lower()
    candidates = [token]
    irregular = _inflected_to_lemma().get(token)
    if irregular:
        candidates.append(irregular)
    if token.endswith("ies") and len(token) > 4:
        candidates.append(token[:-3] + "y")
    if token.endswith("es") and len(token) > 3:
        candidates.append(token[:-2])
    if token.endswith("s") and len(token) > 2:
        candidates.append(token[:-1])
    if token.endswith("ied") and len(token) > 4:
        candidates.append(token[:-3] + "y")
    if token.endswith("ed") and len(token) > 3:
        candidates.append(token[:-2])
        candidates.append(token[:-1])
        if len(token) > 4 and token[-3] == token[-4]:
            candidates.append(token[:-3])
    if token.endswith("ing") and len(token) > 4:
        stem = token[:-3]
        candidates.extend([stem, stem + "e"])
        if len(stem) > 1 and stem[-1] == stem[-2]:
            candidates.append(stem[:-1])
    seen: set[str] = set()
    unique = []
    for cand in candidates:
        if cand not in seen:
            seen.add(cand)
            unique.append(cand)
    return unique
