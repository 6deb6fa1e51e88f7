"""Entailment-scoring microservice for the /v1/score wire protocol."""

__version__ = "0.1.0"
