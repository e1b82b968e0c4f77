#!/usr/bin/env python3
"""Regenerate the end-to-end golden artifacts under
tests/fixtures/golden/e2e/expected/.

Runs the CLI pipeline (ingest, aliases, parse-import, extract, evaluate
cls, evaluate span) over the fixture contract and freezes every
artifact. The assertions below encode the hand-checked expectations for
this fixture; a regeneration that drifts from them fails loudly instead
of silently rewriting the goldens.
"""
from __future__ import annotations

import json
import shutil
import sys
from pathlib import Path

from deomod.cli import main as cli

E2E = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "golden" / "e2e"
EXPECTED = E2E / "expected"


def run(*argv: str) -> None:
    rc = cli(list(argv))
    assert rc == 0, argv


def main() -> int:
    if EXPECTED.exists():
        shutil.rmtree(EXPECTED)
    html = str(E2E / "contract.html")

    run("ingest", "--html", html, "--contract-id", "lease-e2e",
        "--out-dir", str(EXPECTED / "ingest"))
    run("aliases", "--html", html, "--contract-id", "lease-e2e",
        "--out-dir", str(EXPECTED / "aliases"))
    run("parse-import", "--conllu", str(E2E / "parses.conllu"),
        "--out-dir", str(EXPECTED / "parses"))
    run("extract", "--conllu", str(EXPECTED / "parses" / "parses.conllu"),
        "--aliases", str(EXPECTED / "aliases" / "aliases.json"),
        "--out-dir", str(EXPECTED / "extract"))
    run("evaluate", "--task", "cls", "--gold", str(E2E / "gold.jsonl"),
        "--pred", str(EXPECTED / "extract" / "extractions.jsonl"),
        "--out-dir", str(EXPECTED / "eval_cls"))
    run("evaluate", "--task", "span", "--gold", str(E2E / "gold.jsonl"),
        "--pred", str(EXPECTED / "extract" / "extractions.jsonl"),
        "--out-dir", str(EXPECTED / "eval_span"))
    run("evaluate", "--task", "span", "--unlabeled",
        "--gold", str(E2E / "gold.jsonl"),
        "--pred", str(EXPECTED / "extract" / "extractions.jsonl"),
        "--out-dir", str(EXPECTED / "eval_span_unlabeled"))

    sentences = (EXPECTED / "ingest" / "sentences.jsonl").read_text().splitlines()
    assert len(sentences) == 5, len(sentences)

    rows = [
        json.loads(line)
        for line in (EXPECTED / "extract" / "extractions.jsonl")
        .read_text().splitlines()
    ]
    by_key = {(r["sentence_id"], r["agent"]): r for r in rows}
    assert by_key[("lease-e2e-p2-s0", "Tenant")]["labels"] == ["Obl", "Per"]
    assert by_key[("lease-e2e-p2-s0", "Landlord")]["labels"] == ["None"]
    assert by_key[("lease-e2e-p3-s0", "Tenant")]["labels"] == ["Ent"]
    assert by_key[("lease-e2e-p4-s0", "Landlord")]["labels"] == ["Pro"]

    cls = json.loads((EXPECTED / "eval_cls" / "metrics.json").read_text())
    assert cls["accuracy"] == 0.75, cls["accuracy"]
    assert abs(cls["macro"]["precision"] - 0.8) < 1e-12
    assert abs(cls["macro"]["recall"] - 0.7) < 1e-12
    assert abs(cls["micro"]["f1"] - 0.8) < 1e-12

    span = json.loads((EXPECTED / "eval_span" / "metrics.json").read_text())
    assert abs(span["micro"]["f1"] - 8 / 9) < 1e-12
    assert abs(span["accuracy"] - 45 / 46) < 1e-12
    unl = json.loads(
        (EXPECTED / "eval_span_unlabeled" / "metrics.json").read_text()
    )
    assert unl["micro"]["f1"] >= span["micro"]["f1"]

    count = sum(1 for p in EXPECTED.rglob("*") if p.is_file())
    print(f"froze {count} artifacts under {EXPECTED}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
