"""Scoring backends behind the wire protocol.

Every backend maps (premise, hypothesis) pairs to entailment probabilities
in request order. ``lexical`` is a dependency-free deterministic baseline;
``hf:<model-name>`` wraps a sequence-pair NLI classifier from the
transformers hub and reports the probability mass of its entailment class.
"""

from __future__ import annotations

import re
from typing import Protocol, Sequence

_TOKEN_RE = re.compile(r"[a-z0-9']+")

_STOPWORDS = frozenset(
    """a an and are as at be been being but by can could did do does for from had has
    have he her his i in is it its my no not of on or our she some that the their
    there these they this those to was we were will with would you your""".split()
)


class Backend(Protocol):
    name: str
    supports_joint: bool

    def score(self, pairs: Sequence[tuple[str, str]]) -> list[float]: ...


class LexicalBackend:
    """Fraction of the hypothesis's content tokens present in the premise."""

    name = "lexical"
    supports_joint = False

    @staticmethod
    def _content(text: str) -> set[str]:
        return {
            tok.strip("'")
            for tok in _TOKEN_RE.findall(text.lower())
            if tok.strip("'") and tok.strip("'") not in _STOPWORDS
        }

    def score(self, pairs: Sequence[tuple[str, str]]) -> list[float]:
        probs = []
        for premise, hypothesis in pairs:
            hyp = self._content(hypothesis)
            if not hyp:
                probs.append(0.0)
                continue
            probs.append(min(1.0, len(self._content(premise) & hyp) / len(hyp)))
        return probs


class HfNliBackend:
    """transformers sequence-pair classifier; entail_prob is the softmax mass
    of the label whose name contains "entail"."""

    supports_joint = False

    def __init__(self, model_name: str, device: str = "cpu"):
        import torch
        from transformers import AutoModelForSequenceClassification, AutoTokenizer

        self.name = f"hf:{model_name}"
        self._torch = torch
        self.tokenizer = AutoTokenizer.from_pretrained(model_name)
        self.model = AutoModelForSequenceClassification.from_pretrained(model_name)
        self.model.to(device)
        self.model.eval()
        self.device = device
        labels = {i: str(n).lower() for i, n in self.model.config.id2label.items()}
        entail = [i for i, n in labels.items() if "entail" in n and "not" not in n]
        if not entail:
            raise ValueError(f"model {model_name} has no entailment label: {labels}")
        self.entail_index = entail[0]

    def score(self, pairs: Sequence[tuple[str, str]]) -> list[float]:
        if not pairs:
            return []
        torch = self._torch
        premises = [p for p, _ in pairs]
        hypotheses = [h for _, h in pairs]
        with torch.no_grad():
            encoded = self.tokenizer(
                premises, hypotheses, padding=True, truncation=True, return_tensors="pt"
            ).to(self.device)
            probs = torch.softmax(self.model(**encoded).logits, dim=-1)
        return [float(p) for p in probs[:, self.entail_index]]


def make_backend(descriptor: str, device: str = "cpu") -> Backend:
    if descriptor == "lexical":
        return LexicalBackend()
    if descriptor.startswith("hf:"):
        return HfNliBackend(descriptor[len("hf:"):], device=device)
    raise ValueError(f"unknown model descriptor {descriptor!r}")


def sanity_check(backend: Backend, n_pairs: int = 20, minimum: float = 0.9) -> None:
    """Reject a backend that fails identity pairs: a premise must entail
    itself with probability >= ``minimum``."""
    sentences = [
        f"the {noun} {verb} in test {i}"
        for i, (noun, verb) in enumerate(
            (n, v)
            for n in ("river", "engine", "council", "garden", "signal")
            for v in ("opened", "moved", "closed", "expanded")
        )
    ][:n_pairs]
    probs = backend.score([(s, s) for s in sentences])
    bad = [p for p in probs if p < minimum]
    if bad:
        raise ValueError(
            f"backend {backend.name} failed the identity-pair check: "
            f"{len(bad)}/{n_pairs} pairs below {minimum}"
        )
