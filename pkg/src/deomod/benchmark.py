"""Access to the benchmark corpus bundled with the package.

The corpus ships as gzip-compressed artifacts under ``data/benchmark/``:
line-delimited JSON records for all three splits, plus one CoNLL-U
dependency parse per test-split sentence so the rule engine and the
baselines can run end to end. Regenerate with ``tools/make_benchmark.py``.
"""
from __future__ import annotations

import gzip
from importlib import resources

from .corpus import AnnotationRecord, read_records
from .lingrep import ParsedSentence, read_conllu


def _read_member(name: str) -> str:
    blob = resources.files("deomod").joinpath(f"data/benchmark/{name}").read_bytes()
    return gzip.decompress(blob).decode("utf-8")


def load_records() -> list[AnnotationRecord]:
    """Every benchmark record, split assignments already stamped."""
    return read_records(_read_member("corpus.jsonl.gz").splitlines())


def load_test_parses() -> list[ParsedSentence]:
    """Dependency parses for the test split, one per sentence."""
    return read_conllu(_read_member("parses_test.conllu.gz"))
