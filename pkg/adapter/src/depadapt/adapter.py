"""Convert sentence records to CoNLL-U plus completeness and entity
sidecars.

Input is line-delimited JSON with at least ``sentence_id`` and ``text``
per row; ``provision_index`` (when present) keys the completeness
sidecar. Output parses always form single-rooted trees with contiguous
1-based ids, so they are accepted by downstream CoNLL-U readers as-is.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

from . import __version__
from . import heuristic


class SetupError(RuntimeError):
    """A requested parser backend is not usable in this environment."""


@dataclass
class AdapterOutput:
    conllu: str
    completeness: dict[int, bool]
    entities: list[dict]
    mentions: list[str]
    errors: list[dict] = field(default_factory=list)


def _conllu_block(sid: str, text: str, rows: list[tuple[str, str, int, int]]) -> str:
    # rows: (surface, upos, head0, ...) with the root self-headed
    lines = [f"# sent_id = {sid}", f"# text = {' '.join(text.split())}"]
    for i, (surface, upos, head, deprel) in enumerate(rows):
        head1 = 0 if head == i else head + 1
        lines.append(
            "\t".join(
                [str(i + 1), surface, "_", upos, "_", "_", str(head1), deprel, "_", "_"]
            )
        )
    return "\n".join(lines)


def _check_tree(heads: list[int]) -> str | None:
    n = len(heads)
    roots = [i for i, h in enumerate(heads) if h == i]
    if len(roots) != 1:
        return f"expected one root, built {len(roots)}"
    if any(not 0 <= h < n for h in heads):
        return "head out of range"
    seen = set(roots)
    stack = list(roots)
    while stack:
        top = stack.pop()
        for i, h in enumerate(heads):
            if h == top and i not in seen:
                seen.add(i)
                stack.append(i)
    if len(seen) != n:
        return "heads contain a cycle"
    return None


def _heuristic_sentence(text: str) -> tuple[list[tuple], bool, list[dict]]:
    spans = heuristic.tokenize(text)
    if not spans:
        raise ValueError("no tokens")
    surfaces = [s for s, _, _ in spans]
    tags = heuristic.tag(surfaces)
    heads, rels, complete = heuristic.parse(surfaces, tags)
    problem = _check_tree(heads)
    if problem:
        raise ValueError(problem)
    rows = list(zip(surfaces, tags, heads, rels))
    ents = heuristic.mentions(surfaces, tags, spans, text)
    return rows, complete, ents


def _load_spacy(model: str | None):
    try:
        import spacy
    except ImportError:
        raise SetupError(
            "the spacy backend needs the spacy package; install it with "
            "'pip install spacy' and fetch a model with "
            "'python -m spacy download en_core_web_sm'"
        ) from None
    name = model or "en_core_web_sm"
    try:
        return spacy, spacy.load(name)
    except OSError:
        raise SetupError(
            f"spacy model {name!r} is not installed; fetch it with "
            f"'python -m spacy download {name}'"
        ) from None


def _spacy_sentence(nlp, text: str) -> tuple[list[tuple], bool, list[dict]]:
    doc = nlp(text)
    kept = [t for t in doc if not t.is_space]
    if not kept:
        raise ValueError("no tokens")
    remap = {t.i: i for i, t in enumerate(kept)}

    def head_of(tok):
        h = tok.head
        while h.is_space and h.head is not h:
            h = h.head
        return h

    rows = []
    first_root = None
    for i, t in enumerate(kept):
        h = head_of(t)
        if h is t or t.dep_ == "ROOT":
            if first_root is None:
                first_root = i
                rows.append((t.text, t.pos_, i, "ROOT"))
            else:
                rows.append((t.text, t.pos_, first_root, "parataxis"))
        else:
            rows.append((t.text, t.pos_, remap[h.i], t.dep_))
    complete = any(
        t.dep_ in ("nsubj", "nsubjpass", "csubj") for t in kept
    ) and any(t.pos_ in ("VERB", "AUX") for t in kept)
    kinds = {"PERSON": "person", "ORG": "company"}
    ents = [
        {
            "start": e.start_char,
            "end": e.end_char,
            "surface": e.text,
            "kind": kinds[e.label_],
        }
        for e in doc.ents
        if e.label_ in kinds
    ]
    return rows, complete, ents


def parse_sentences(lines: Iterable[str], parser_name: str = "heuristic") -> AdapterOutput:
    """Parse line-delimited sentence records with the named backend.

    Per-row failures (bad JSON, missing fields, duplicate ids, parser
    errors) skip the row and land in ``errors``; everything else is
    deterministic given the backend name and version.
    """
    if parser_name == "heuristic":
        header = f"# parser = heuristic {__version__}"
        parse_one = _heuristic_sentence
    elif parser_name == "spacy" or parser_name.startswith("spacy:"):
        _, _, model = parser_name.partition(":")
        spacy_mod, nlp = _load_spacy(model or None)
        header = (
            f"# parser = spacy {spacy_mod.__version__} "
            f"{nlp.meta['lang']}_{nlp.meta['name']} {nlp.meta['version']}"
        )
        parse_one = lambda text: _spacy_sentence(nlp, text)
    else:
        raise SetupError(
            f"unknown parser {parser_name!r}; choose 'heuristic', 'spacy', "
            "or 'spacy:<model>'"
        )

    blocks: list[str] = []
    completeness: dict[int, bool] = {}
    entities: list[dict] = []
    mentions: set[str] = set()
    errors: list[dict] = []
    seen: set[str] = set()

    for lineno, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        try:
            row = json.loads(raw)
            if not isinstance(row, dict):
                raise ValueError("row is not an object")
            sid = str(row["sentence_id"])
            text = str(row["text"])
        except (ValueError, KeyError) as exc:
            errors.append({"line": lineno, "error": f"bad record: {exc}"})
            continue
        if sid in seen:
            errors.append(
                {"line": lineno, "sentence_id": sid, "error": "duplicate sentence_id"}
            )
            continue
        try:
            rows, complete, ents = parse_one(text)
        except ValueError as exc:
            errors.append({"line": lineno, "sentence_id": sid, "error": str(exc)})
            continue
        seen.add(sid)
        blocks.append(_conllu_block(sid, text, rows))
        if "provision_index" in row:
            key = int(row["provision_index"])
            completeness[key] = completeness.get(key, True) and complete
        for ent in ents:
            entities.append({"sentence_id": sid, **ent})
            mentions.add(ent["surface"])

    conllu = header + "\n"
    if blocks:
        conllu += "\n" + "\n\n".join(blocks) + "\n"
    return AdapterOutput(
        conllu=conllu,
        completeness=completeness,
        entities=entities,
        mentions=sorted(mentions),
        errors=errors,
    )
