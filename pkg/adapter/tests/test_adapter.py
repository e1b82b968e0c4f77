"""Tests for the dependency-parse adapter.

The round-trip contract is the important part: everything the adapter
emits must be accepted verbatim by the consuming toolkit's readers
(read_conllu, align_tokens, the aliases --mentions hook, the ingest
--completeness hook), with no massaging in between.
"""
from __future__ import annotations

import importlib.util
import json
from pathlib import Path

import pytest

from deomod.lingrep import align_tokens, read_conllu

from depadapt import AdapterOutput, SetupError, parse_sentences
from depadapt.cli import main as adapter_cli
from depadapt.heuristic import tokenize

FIXTURES = Path(__file__).parent / "fixtures"

HAVE_SPACY = importlib.util.find_spec("spacy") is not None


def fixture_lines() -> list[str]:
    return (FIXTURES / "sentences10.jsonl").read_text().splitlines()


def test_tokenizer_covers_text_exactly():
    texts = [
        "Tenant pays rent.",
        'This Lease is made by Acme Leasing LLC (the "Landlord").',
        "a well-known clause; see ¶ 4.2 (the “Notice”)",
        "   spaced\tout\ntext   ",
        "",
    ]
    for text in texts:
        toks = tokenize(text)
        rebuilt = "".join(s for s, _, _ in toks)
        assert rebuilt == "".join(text.split())
        for surface, start, end in toks:
            assert text[start:end] == surface


def test_minimal_svo_tree():
    line = json.dumps({"sentence_id": "s1", "text": "Tenant pays rent."})
    out = parse_sentences([line])
    assert out.errors == []
    sents = read_conllu(out.conllu)
    assert len(sents) == 1
    sent = sents[0]
    assert sent.surfaces() == ["Tenant", "pays", "rent", "."]
    root = sent.tokens[sent.root_index]
    assert root.surface == "pays"
    rels = {t.surface: t.deprel for t in sent.tokens}
    assert rels["Tenant"] == "nsubj"
    assert rels["rent"] == "dobj"
    heads = {t.surface: t.head for t in sent.tokens}
    assert heads["Tenant"] == sent.root_index
    assert heads["rent"] == sent.root_index


def test_ten_sentence_round_trip():
    lines = fixture_lines()
    out = parse_sentences(lines)
    assert isinstance(out, AdapterOutput)
    assert out.errors == []

    sents = read_conllu(out.conllu)
    want_ids = [json.loads(line)["sentence_id"] for line in lines]
    assert [s.sentence_id for s in sents] == want_ids

    by_id = {json.loads(line)["sentence_id"]: json.loads(line) for line in lines}
    for sent in sents:
        aligned = align_tokens(sent, by_id[sent.sentence_id]["text"])
        assert all(t.char_span is not None for t in aligned.tokens)

    # provision 0 is a bare heading with no clause; everything else
    # carries a subject and a predicate
    assert out.completeness == {0: False, **{k: True for k in range(1, 10)}}


def test_empty_input_yields_empty_artifacts():
    out = parse_sentences([])
    assert read_conllu(out.conllu) == []
    assert out.completeness == {}
    assert out.entities == []
    assert out.mentions == []
    assert out.errors == []


def test_malformed_rows_are_reported_not_fatal():
    good = json.dumps({"sentence_id": "ok-1", "text": "Tenant pays rent."})
    bad_json = "{not json"
    missing_field = json.dumps({"sentence_id": "no-text"})
    duplicate = json.dumps({"sentence_id": "ok-1", "text": "Tenant pays rent."})
    out = parse_sentences([good, bad_json, missing_field, duplicate])

    sents = read_conllu(out.conllu)
    assert [s.sentence_id for s in sents] == ["ok-1"]

    assert len(out.errors) == 3
    assert all("error" in e and "line" in e for e in out.errors)
    assert {e["line"] for e in out.errors} == {2, 3, 4}
    assert any(e.get("sentence_id") == "ok-1" and "duplicate" in e["error"]
               for e in out.errors)


def test_entity_kinds_and_mentions():
    out = parse_sentences(fixture_lines())
    kinds = {e["surface"]: e["kind"] for e in out.entities}
    assert kinds["Acme Leasing LLC"] == "company"
    assert kinds["John Smith"] == "person"
    assert set(out.mentions) >= {"Acme Leasing LLC", "John Smith",
                                 "Landlord", "Tenant"}
    assert out.mentions == sorted(out.mentions)


def test_unknown_parser_rejected():
    with pytest.raises(SetupError):
        parse_sentences([], parser_name="stanza")


@pytest.mark.skipif(HAVE_SPACY, reason="spacy installed; hint path unreachable")
def test_spacy_backend_explains_setup():
    with pytest.raises(SetupError, match="pip install spacy"):
        parse_sentences([], parser_name="spacy")


def test_cli_writes_all_artifacts(tmp_path):
    out_dir = tmp_path / "parsed"
    rc = adapter_cli(["--in", str(FIXTURES / "sentences10.jsonl"),
                      "--out-dir", str(out_dir)])
    assert rc == 0
    for name in ("parses.conllu", "completeness.json", "entities.jsonl",
                 "mentions.json", "errors.jsonl"):
        assert (out_dir / name).exists(), name
    sents = read_conllu((out_dir / "parses.conllu").read_text())
    assert len(sents) == 10
    completeness = json.loads((out_dir / "completeness.json").read_text())
    assert completeness["0"] is False and completeness["2"] is True
    assert (out_dir / "errors.jsonl").read_text() == ""


def test_cli_missing_input_file(tmp_path, capsys):
    rc = adapter_cli(["--in", str(tmp_path / "absent.jsonl"),
                      "--out-dir", str(tmp_path / "out")])
    assert rc == 1
    assert "absent.jsonl" in capsys.readouterr().err


def test_cli_rejects_bad_usage(tmp_path):
    with pytest.raises(SystemExit) as exc:
        adapter_cli(["--in", str(tmp_path / "x.jsonl")])
    assert exc.value.code == 2


def test_pipeline_with_adapter_parses(tmp_path):
    """Full chain on a fresh contract: ingest the HTML, parse the
    sentences with this adapter, feed the sidecars back to the toolkit,
    and check the rule engine finds real modalities in the result."""
    from deomod.cli import main as deomod_cli

    html = str(FIXTURES / "contract.html")

    def run(*argv: str) -> None:
        assert deomod_cli(list(argv)) == 0, argv

    run("ingest", "--html", html, "--contract-id", "office-1",
        "--out-dir", str(tmp_path / "ingest"))

    rc = adapter_cli(["--in", str(tmp_path / "ingest" / "sentences.jsonl"),
                      "--out-dir", str(tmp_path / "parsed")])
    assert rc == 0
    assert (tmp_path / "parsed" / "errors.jsonl").read_text() == ""

    run("aliases", "--html", html, "--contract-id", "office-1",
        "--mentions", str(tmp_path / "parsed" / "mentions.json"),
        "--out-dir", str(tmp_path / "aliases"))
    aliases = json.loads((tmp_path / "aliases" / "aliases.json").read_text())
    assert {a["alias"] for a in aliases["aliases"]} == {"Landlord", "Tenant"}

    run("parse-import", "--conllu", str(tmp_path / "parsed" / "parses.conllu"),
        "--out-dir", str(tmp_path / "parses"))
    run("extract", "--conllu", str(tmp_path / "parses" / "parses.conllu"),
        "--aliases", str(tmp_path / "aliases" / "aliases.json"),
        "--out-dir", str(tmp_path / "extract"))

    rows = [json.loads(line) for line in
            (tmp_path / "extract" / "extractions.jsonl")
            .read_text().splitlines()]
    assert rows
    by_key = {(r["sentence_id"], r["agent"]): r["labels"] for r in rows}
    assert by_key[("office-1-p2-s0", "Tenant")] == ["Obl"]
    assert by_key[("office-1-p4-s0", "Landlord")] == ["Per"]
    assert by_key[("office-1-p5-s0", "Tenant")] == ["Pro"]
    labelled = [labels for labels in by_key.values() if labels != ["None"]]
    assert len(labelled) >= 3
