"""Deterministic fallback dependency parser.

A closed-class tagger plus a clause-structured attachment pass. The
output is not a full grammatical analysis; it is a predictable scaffold
with the properties downstream pattern matching relies on: exactly one
root per sentence, modal auxiliaries attached to their clause verb,
subjects and passive by-agents labeled, and coordination chained to the
first conjunct. Everything here is a pure function of the input text.
"""
from __future__ import annotations

import re

_WORD = re.compile(r"\S+")

# Characters peeled off chunk edges as separate tokens. Interior
# punctuation (hyphens, apostrophes, decimal points) stays attached so
# the concatenated surfaces reproduce the text exactly.
_EDGE_PUNCT = set("()[]{}<>\"'`.,;:!?%#$@*+=/\\|~^&–—‘’“”")

_DET = {
    "the", "a", "an", "this", "that", "these", "those", "any", "each",
    "every", "such", "no", "its", "his", "her", "their", "all", "both",
}
_MODAL = {
    "shall", "will", "may", "must", "can", "could", "should", "would",
    "might", "cannot", "ought",
}
_BE = {"be", "been", "being", "is", "are", "was", "were", "am"}
_AUX_OTHER = {"have", "has", "had", "do", "does", "did"}
_AUX = _MODAL | _BE | _AUX_OTHER
_ADP = {
    "of", "in", "on", "to", "by", "for", "with", "under", "over", "at",
    "from", "into", "upon", "within", "without", "during", "after",
    "before", "between", "through", "against", "per", "as", "about",
    "across", "notwithstanding", "until", "unless",
}
_CCONJ = {"and", "or", "nor", "but"}
_NEG = {"not", "never", "n't"}
_NOMINAL = ("DET", "NOUN", "PROPN", "NUM")

_COMPANY_CUES = {
    "inc", "llc", "ltd", "corp", "corporation", "company", "co", "plc",
    "lp", "llp", "holdings", "partners", "group", "bank", "trust",
}


def tokenize(text: str) -> list[tuple[str, int, int]]:
    """Split on whitespace, then peel edge punctuation into separate
    tokens. Returns (surface, start, end) char spans covering every
    non-space character of the input."""
    out: list[tuple[str, int, int]] = []
    for m in _WORD.finditer(text):
        chunk, base = m.group(), m.start()
        lo, hi = 0, len(chunk)
        while lo < hi and chunk[lo] in _EDGE_PUNCT:
            out.append((chunk[lo], base + lo, base + lo + 1))
            lo += 1
        tail: list[tuple[str, int, int]] = []
        while hi > lo and chunk[hi - 1] in _EDGE_PUNCT:
            hi -= 1
            tail.append((chunk[hi], base + hi, base + hi + 1))
        if hi > lo:
            out.append((chunk[lo:hi], base + lo, base + hi))
        out.extend(reversed(tail))
    return out


def tag(surfaces: list[str]) -> list[str]:
    """Closed-class tagging with one promotion pass: the token that ends
    an auxiliary chain becomes the clause VERB. With no auxiliaries at
    all, a lowercase noun directly after a noun is promoted instead,
    covering bare subject-verb-object sentences."""
    tags: list[str] = []
    for s in surfaces:
        low = s.lower()
        if not any(ch.isalnum() for ch in s):
            tags.append("PUNCT")
        elif low in _DET:
            tags.append("DET")
        elif low in _AUX:
            tags.append("AUX")
        elif low in _NEG:
            tags.append("PART")
        elif low in _ADP:
            tags.append("ADP")
        elif low in _CCONJ:
            tags.append("CCONJ")
        elif s[:1].isdigit():
            tags.append("NUM")
        elif s[:1].isupper():
            tags.append("PROPN")
        elif low.endswith("ly") and len(low) > 3:
            tags.append("ADV")
        else:
            tags.append("NOUN")

    i = 0
    while i < len(tags):
        if tags[i] == "AUX":
            j = i + 1
            while j < len(tags) and tags[j] in ("AUX", "PART", "ADV"):
                j += 1
            if j < len(tags) and tags[j] == "NOUN":
                tags[j] = "VERB"
            i = j + 1
        else:
            i += 1

    if "AUX" not in tags and "VERB" not in tags:
        for i in range(1, len(tags)):
            if tags[i] == "NOUN" and tags[i - 1] in ("NOUN", "PROPN"):
                tags[i] = "VERB"
                break
    return tags


def _noun_groups(tags: list[str], lo: int, hi: int) -> list[tuple[list[int], int]]:
    """Maximal nominal runs in [lo, hi) as (member indices, head index).
    The head is the last non-determiner member."""
    groups = []
    i = lo
    while i < hi:
        if tags[i] in _NOMINAL:
            j = i
            while j < hi and tags[j] in _NOMINAL:
                j += 1
            members = list(range(i, j))
            content = [k for k in members if tags[k] != "DET"]
            groups.append((members, content[-1] if content else members[-1]))
            i = j
        else:
            i += 1
    return groups


def parse(surfaces: list[str], tags: list[str]) -> tuple[list[int], list[str], bool]:
    """Attach every token; returns (heads, deprels, complete).

    Heads are 0-based with the root pointing at itself. ``complete``
    reports the finite-verb-plus-subject heuristic for the sentence.
    """
    n = len(surfaces)
    heads = [-1] * n
    rels = [""] * n
    lows = [s.lower() for s in surfaces]

    def attach(idx: int, head: int, rel: str) -> None:
        if heads[idx] == -1:
            heads[idx] = head
            rels[idx] = rel

    # clause discovery: each auxiliary chain anchors a clause, the token
    # promoted at its end (if any) is the clause verb
    clauses: list[dict] = []
    i = 0
    while i < n:
        if tags[i] == "AUX":
            aux = [i]
            j = i + 1
            while j < n and tags[j] in ("AUX", "PART", "ADV"):
                if tags[j] == "AUX":
                    aux.append(j)
                j += 1
            verb = j if j < n and tags[j] == "VERB" else aux[-1]
            clauses.append({
                "aux": aux,
                "verb": verb,
                "start": i,
                "passive": verb >= j and any(lows[a] in _BE for a in aux),
            })
            i = max(verb, j - 1) + 1
        elif tags[i] == "VERB":
            clauses.append({"aux": [], "verb": i, "start": i, "passive": False})
            i += 1
        else:
            i += 1

    if clauses:
        root = clauses[0]["verb"]
    else:
        root = next((k for k in range(n) if tags[k] != "PUNCT"), 0)
        clauses = [{"aux": [], "verb": root, "start": root, "passive": False}]
    heads[root] = root
    rels[root] = "ROOT"

    # chain later clauses to the first conjunct verb; the cc that links
    # them bounds the previous clause's object region
    splits: list[int] = []       # where clause k's subject region starts
    obj_bounds: list[int] = []   # where clause k's object region ends
    for k, clause in enumerate(clauses):
        if k == 0:
            splits.append(0)
            continue
        prev_verb = clauses[k - 1]["verb"]
        attach(clause["verb"], prev_verb, "conj")
        link = None
        for c in range(clause["start"] - 1, prev_verb, -1):
            if tags[c] == "CCONJ" and heads[c] == -1:
                link = c
                break
        if link is not None:
            attach(link, prev_verb, "cc")
            splits.append(link + 1)
            obj_bounds.append(link)
        else:
            splits.append(clause["start"])
            obj_bounds.append(clause["start"])
    obj_bounds.append(n)

    has_subject = False
    for k, clause in enumerate(clauses):
        verb = clause["verb"]
        for a in clause["aux"]:
            if a != verb:
                attach(a, verb, "aux")
        for t in range(clause["start"], verb):
            if tags[t] == "PART":
                attach(t, verb, "neg")
            elif tags[t] == "ADV":
                attach(t, verb, "advmod")

        # subject region: tokens between the previous split point and
        # the clause start. Only the trailing coordination chain of noun
        # groups is the subject; earlier groups are intro material.
        lo, hi = splits[k], clause["start"]
        groups = _noun_groups(tags, lo, hi)
        chain_from = len(groups) - 1
        while chain_from > 0:
            prev_members, _ = groups[chain_from - 1]
            members, _ = groups[chain_from]
            gap = range(prev_members[-1] + 1, members[0])
            if gap and all(tags[g] in ("CCONJ", "PUNCT") for g in gap) and any(
                tags[g] == "CCONJ" for g in gap
            ):
                chain_from -= 1
            else:
                break
        subject = None
        for gi, (members, head_tok) in enumerate(groups):
            if gi == chain_from:
                subject = head_tok
                rel = "nsubjpass" if clause["passive"] else "nsubj"
                attach(head_tok, verb, rel)
                if k == 0:
                    has_subject = True
            elif gi > chain_from and subject is not None:
                attach(head_tok, subject, "conj")
            else:
                attach(head_tok, verb, "dep")
            for t in members:
                if t == head_tok:
                    continue
                attach(t, head_tok, "det" if tags[t] == "DET" else "compound")
        for t in range(lo, hi):
            if heads[t] != -1:
                continue
            if tags[t] == "CCONJ" and subject is not None:
                attach(t, subject, "cc")
            elif tags[t] == "ADP":
                attach(t, verb, "prep")
            elif tags[t] == "PUNCT":
                attach(t, root, "punct")
            else:
                attach(t, verb, "dep")

        # object region: from the clause verb to the next clause (or the
        # linking cc, when there is one)
        hi = obj_bounds[k]
        last_prep = None
        chain_first = None
        after_cc = False
        t = verb + 1
        while t < hi:
            if tags[t] in _NOMINAL:
                members, head_tok = _noun_groups(tags, t, hi)[0]
                if after_cc and chain_first is not None:
                    attach(head_tok, chain_first, "conj")
                elif last_prep is not None:
                    attach(head_tok, last_prep, "pobj")
                    last_prep = None
                    chain_first = head_tok
                else:
                    attach(head_tok, verb, "dobj")
                    chain_first = head_tok
                after_cc = False
                for m in members:
                    if m != head_tok:
                        attach(m, head_tok, "det" if tags[m] == "DET" else "compound")
                t = members[-1] + 1
                continue
            if tags[t] == "ADP":
                rel = "agent" if lows[t] == "by" and clause["passive"] else "prep"
                attach(t, verb, rel)
                last_prep = t
                chain_first = None
                after_cc = False
            elif tags[t] == "CCONJ":
                attach(t, chain_first if chain_first is not None else verb, "cc")
                after_cc = chain_first is not None
            elif tags[t] == "PART":
                attach(t, verb, "neg")
            elif tags[t] == "ADV":
                attach(t, verb, "advmod")
            elif tags[t] == "PUNCT":
                attach(t, root, "punct")
            else:
                attach(t, verb, "dep")
            t += 1

    for t in range(n):
        if heads[t] == -1:
            attach(t, root, "punct" if tags[t] == "PUNCT" else "dep")

    complete = bool(clauses[0]["aux"]) or tags[clauses[0]["verb"]] == "VERB"
    return heads, rels, complete and has_subject


def mentions(
    surfaces: list[str],
    tags: list[str],
    spans: list[tuple[str, int, int]],
    text: str,
) -> list[dict]:
    """Capitalized-run entity mentions with char offsets and a coarse
    kind: company when a corporate cue word occurs in the run, person
    otherwise."""
    out = []
    i = 0
    while i < len(tags):
        if tags[i] == "PROPN":
            j = i
            while j < len(tags) and tags[j] == "PROPN":
                j += 1
            start = spans[i][1]
            end = spans[j - 1][2]
            words = {surfaces[k].lower().rstrip(".") for k in range(i, j)}
            out.append({
                "start": start,
                "end": end,
                "surface": text[start:end],
                "kind": "company" if words & _COMPANY_CUES else "person",
            })
            i = j
        else:
            i += 1
    return out
