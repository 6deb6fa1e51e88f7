"""Presupposition toolkit: trigger-based generation from question parses,
entailment-backed verification against documents, templatic unanswerability
explanations, and augmented QA-model inputs."""

__version__ = "0.1.0"
