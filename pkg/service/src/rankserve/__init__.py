"""Toy-scale model service for paraphrase generation and pair scoring."""

__version__ = "0.1.0"
