"""Sentence-record to CoNLL-U conversion with completeness and entity
sidecars for contract-analysis pipelines."""

__version__ = "0.1.0"

from .adapter import AdapterOutput, SetupError, parse_sentences  # noqa: E402,F401
