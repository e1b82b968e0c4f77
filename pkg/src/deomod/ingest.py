"""Contract ingestion: provisions out of raw HTML, definitional-clause
filtering, bullet merging, contract typing, alias discovery, sentence
segmentation, and per-agent expansion.

Character spans use slice convention [start, end); token spans elsewhere
in the package are inclusive.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from html.parser import HTMLParser
from typing import Callable, Iterable, Mapping, Sequence

from .defaults import (
    ALIAS_FREQUENCY_THRESHOLD,
    DEFAULT_ALIAS_GROUPS,
    DEFINITION_CUES,
    group_of,
)
from .errors import ConfigurationError, IngestionError


@dataclass(frozen=True)
class Provision:
    """One block-level unit of contract text. depth counts emitted block
    ancestors; parent_index points at the nearest emitted ancestor."""

    contract_id: str
    index: int
    text: str
    depth: int = 0
    parent_index: int | None = None

    def to_dict(self) -> dict:
        return {
            "contract_id": self.contract_id,
            "index": self.index,
            "text": self.text,
            "depth": self.depth,
            "parent_index": self.parent_index,
        }


@dataclass(frozen=True)
class AgentAlias:
    alias: str
    canonical_group: str
    frequency: int

    def to_dict(self) -> dict:
        return {
            "alias": self.alias,
            "canonical_group": self.canonical_group,
            "frequency": self.frequency,
        }


@dataclass(frozen=True)
class SentenceRecord:
    sentence_id: str
    contract_id: str
    provision_index: int
    text: str
    char_span: tuple[int, int]

    def to_dict(self) -> dict:
        return {
            "sentence_id": self.sentence_id,
            "contract_id": self.contract_id,
            "provision_index": self.provision_index,
            "text": self.text,
            "char_span": list(self.char_span),
        }


@dataclass(frozen=True)
class AgentSentence:
    sentence_id: str
    contract_id: str
    agent: AgentAlias
    text: str

    def to_dict(self) -> dict:
        return {
            "sentence_id": self.sentence_id,
            "contract_id": self.contract_id,
            "agent": self.agent.to_dict(),
            "text": self.text,
        }


# ---------------------------------------------------------------------------
# HTML extraction

_BLOCK_TAGS = ("p", "div")
_SKIP_TAGS = ("script", "style")


class _BlockCollector(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.nodes: list[dict] = []
        self.stack: list[int] = []
        self._skip_depth = 0

    def handle_starttag(self, tag, attrs):
        if tag in _SKIP_TAGS:
            self._skip_depth += 1
            return
        if tag in _BLOCK_TAGS:
            node = {
                "tag": tag,
                "parent": self.stack[-1] if self.stack else None,
                "parts": [],
            }
            self.nodes.append(node)
            self.stack.append(len(self.nodes) - 1)
        elif tag == "br" and self.stack:
            self.nodes[self.stack[-1]]["parts"].append(" ")

    def handle_endtag(self, tag):
        if tag in _SKIP_TAGS:
            self._skip_depth = max(0, self._skip_depth - 1)
            return
        if tag in _BLOCK_TAGS and self.stack:
            # Tolerant close: only pop when the tag matches the open block.
            if self.nodes[self.stack[-1]]["tag"] == tag:
                self.stack.pop()

    def handle_data(self, data):
        if self._skip_depth or not self.stack:
            return
        self.nodes[self.stack[-1]]["parts"].append(data)


def extract_provisions(html_text: str, contract_id: str) -> list[Provision]:
    """Provisions from <p> and <div> elements in document order.

    Each block contributes its direct inline text; nested blocks become
    their own provisions carrying the parent's index and depth + 1.
    Whitespace is collapsed, entities decoded, empty blocks dropped.
    """
    collector = _BlockCollector()
    collector.feed(html_text)
    collector.close()

    kept: list[Provision] = []
    final_index: dict[int, int] = {}
    for node_id, node in enumerate(collector.nodes):
        text = " ".join("".join(node["parts"]).split())
        if not text:
            continue
        parent = node["parent"]
        while parent is not None and parent not in final_index:
            parent = collector.nodes[parent]["parent"]
        parent_index = final_index[parent] if parent is not None else None
        depth = 0 if parent_index is None else kept[parent_index].depth + 1
        final_index[node_id] = len(kept)
        kept.append(
            Provision(
                contract_id=contract_id,
                index=len(kept),
                text=text,
                depth=depth,
                parent_index=parent_index,
            )
        )
    if not kept:
        raise IngestionError(
            f"{contract_id}: no extractable provisions in document"
        )
    return kept


# ---------------------------------------------------------------------------
# Definitional filtering


def _cue_patterns(cues: Sequence[str]) -> list[re.Pattern]:
    return [
        re.compile(r"\b" + re.escape(cue) + r"\b", re.IGNORECASE) for cue in cues
    ]


def filter_definitions(
    provisions: Sequence[Provision], cues: Sequence[str] = DEFINITION_CUES
) -> list[Provision]:
    """Drop provisions containing a definitional cue. Idempotent."""
    patterns = _cue_patterns(cues)
    return [
        p
        for p in provisions
        if not any(rx.search(p.text) for rx in patterns)
    ]


def definition_discards(
    provisions: Sequence[Provision], cues: Sequence[str] = DEFINITION_CUES
) -> list[tuple[Provision, str]]:
    """The provisions filter_definitions would drop, with the cue hit."""
    patterns = list(zip(cues, _cue_patterns(cues)))
    out = []
    for p in provisions:
        for cue, rx in patterns:
            if rx.search(p.text):
                out.append((p, cue))
                break
    return out


# ---------------------------------------------------------------------------
# Bullet merging

_SUB_BULLET_RES = (
    re.compile(r"^\([ivx]+\b"),
    re.compile(r"^\([a-zA-Z]+\b"),
    re.compile(r"^[\d.]*\d"),
)
_FOLLOWING_TAIL = re.compile(r"the following:\s*$", re.IGNORECASE)


def is_sub_bullet(text: str) -> bool:
    return any(rx.match(text) for rx in _SUB_BULLET_RES)


def _strip_colon(text: str) -> str:
    return text[:-1].rstrip() if text.endswith(":") else text


def merge_bullets(
    provisions: Sequence[Provision],
    completeness: Callable[[Provision], bool | None],
) -> list[Provision]:
    """Merge enumerated sub-bullets into their preceding provision.

    Merge candidates are provisions matching a sub-bullet enumerator or
    starting lowercase (continuation lines). A candidate merges when:
    it starts lowercase and the parent lacks follow/below cues (no
    completeness needed); or it is incomplete, the parent is complete,
    and the parent lacks those cues; both strip the parent's trailing
    colon. A parent ending in "the following:" absorbs an incomplete
    child in place of that phrase or is concatenated with a complete
    one; any other parent ending in ':' concatenates. Unmatched
    candidates stand alone. Idempotent on its own output.
    """

    def is_complete(original: Provision, cache: dict) -> bool:
        if "value" not in cache:
            value = completeness(original)
            if value is None:
                raise ConfigurationError(
                    f"completeness oracle has no value for provision "
                    f"{original.contract_id}:{original.index}"
                )
            cache["value"] = bool(value)
        return cache["value"]

    merged: list[tuple[Provision, Provision, dict]] = []  # (current, original, cache)
    for prov in provisions:
        lowercase_start = prov.text[:1].islower()
        if merged and (is_sub_bullet(prov.text) or lowercase_start):
            parent, parent_orig, cache = merged[-1]
            child_cache: dict = {}
            ptext = parent.text
            lacks_cues = (
                "follow" not in ptext.lower() and "below:" not in ptext.lower()
            )
            new_text = None
            # The lowercase shortcut takes the same action as the
            # completeness rule, so it goes first and skips the oracle.
            if lacks_cues and lowercase_start:
                new_text = _strip_colon(ptext) + " " + prov.text
            elif (
                lacks_cues
                and not is_complete(prov, child_cache)
                and is_complete(parent_orig, cache)
            ):
                new_text = _strip_colon(ptext) + " " + prov.text
            elif _FOLLOWING_TAIL.search(ptext):
                if not is_complete(prov, child_cache):
                    new_text = (
                        _FOLLOWING_TAIL.sub("", ptext).rstrip() + " " + prov.text
                    )
                else:
                    new_text = ptext + " " + prov.text
            elif ptext.endswith(":"):
                new_text = ptext + " " + prov.text
            if new_text is not None:
                merged[-1] = (
                    Provision(
                        contract_id=parent.contract_id,
                        index=parent.index,
                        text=new_text,
                        depth=parent.depth,
                        parent_index=parent.parent_index,
                    ),
                    parent_orig,
                    cache,
                )
                continue
        merged.append((prov, prov, {}))
    return [current for current, _, _ in merged]


# ---------------------------------------------------------------------------
# Contract type

_DETERMINERS = ("this", "the", "a", "an")


def detect_contract_type(
    provisions: Sequence[Provision], window: int = 20
) -> str:
    """Contract type from the first all-caps heading containing
    AGREEMENT inside the leading window; "unknown" when absent."""
    for p in provisions[:window]:
        text = p.text
        letters = [c for c in text if c.isalpha()]
        if not letters or not all(c.isupper() for c in letters):
            continue
        words = re.findall(r"[A-Za-z]+", text)
        if "AGREEMENT" not in words:
            continue
        head = words[: words.index("AGREEMENT")]
        phrase = [w.lower() for w in head]
        while phrase and phrase[0] in _DETERMINERS:
            phrase = phrase[1:]
        return " ".join(phrase) if phrase else "unknown"
    return "unknown"


# ---------------------------------------------------------------------------
# Alias discovery

_PAREN_ALIAS = re.compile(
    r"\(\s*(?:hereinafter\s+)?(?:referred\s+to\s+as\s+)?(?:the\s+)?"
    r"[\"“']?([A-Z][A-Za-z]{1,30}(?:\s+[A-Z][A-Za-z]{1,30}){0,2})"
    r"[\"”']?\s*\)"
)
_CAP_RUN = re.compile(
    r"[A-Z][\w.&'-]*(?:\s+(?:of|and|the|[A-Z][\w.&'-]*)){0,6}"
)


def extract_aliases(
    provisions: Sequence[Provision],
    entity_mentions: Sequence[str] | None = None,
    threshold: int = ALIAS_FREQUENCY_THRESHOLD,
    alias_groups: Mapping[str, str] | None = None,
    window: int = 20,
) -> list[AgentAlias]:
    """Parenthetical aliases following entity mentions in the leading
    window, kept at or above the frequency threshold.

    entity_mentions may come from the parse adapter's sidecar; without
    it a capitalized-run heuristic decides whether a parenthetical
    follows an entity. Empty result is legitimate (caller may warn)."""
    groups = dict(DEFAULT_ALIAS_GROUPS if alias_groups is None else alias_groups)
    counts: dict[str, int] = {}
    surfaces: dict[str, str] = {}
    for p in provisions[:window]:
        for m in _PAREN_ALIAS.finditer(p.text):
            before = p.text[: m.start()].rstrip()
            context = before[-80:]
            if entity_mentions is not None:
                if not any(e in context for e in entity_mentions):
                    continue
            else:
                tail = _CAP_RUN.findall(context)
                if not tail or not context.endswith(tuple(tail)):
                    ok = any(context.endswith(t.rstrip(",.")) for t in tail)
                    if not ok:
                        continue
            alias = m.group(1).strip()
            key = alias.lower()
            counts[key] = counts.get(key, 0) + 1
            surfaces.setdefault(key, alias)
    out = []
    for key, freq in sorted(counts.items()):
        if freq >= threshold:
            out.append(
                AgentAlias(
                    alias=surfaces[key],
                    canonical_group=group_of(key, groups),
                    frequency=freq,
                )
            )
    out.sort(key=lambda a: (-a.frequency, a.alias))
    return out


# ---------------------------------------------------------------------------
# Sentence segmentation

_ABBREVIATIONS = {
    "no",
    "inc",
    "corp",
    "ltd",
    "llc",
    "co",
    "mr",
    "mrs",
    "ms",
    "dr",
    "st",
    "jr",
    "sr",
    "etc",
    "vs",
    "sec",
    "art",
    "para",
    "approx",
    "dept",
    "e.g",
    "i.e",
    "u.s",
    "a.m",
    "p.m",
}

_TERMINATORS = ".?!"


def _is_boundary(text: str, i: int, sentence_start: int) -> bool:
    """Whether the terminator at text[i] ends a sentence."""
    ch = text[i]
    if ch in "?!":
        return True
    # Decimal number: digit on both sides of the dot.
    if i > 0 and i + 1 < len(text) and text[i - 1].isdigit() and text[i + 1].isdigit():
        return False
    # Word before the dot.
    j = i - 1
    while j >= 0 and (text[j].isalnum() or text[j] == "."):
        j -= 1
    word = text[j + 1 : i].lower()
    if word in _ABBREVIATIONS:
        return False
    # Single-letter initials: "J." in names.
    if len(word) == 1 and word.isalpha():
        return False
    # Leading enumerator of this sentence: "1." / "3.2" right at the start.
    if word and all(c.isdigit() or c == "." for c in word):
        if j + 1 - sentence_start <= 1:
            return False
    # Require end of text or whitespace after the terminator.
    if i + 1 < len(text) and not text[i + 1].isspace():
        return False
    return True


def segment_sentences(provision: Provision) -> list[SentenceRecord]:
    """Rule-based splitting into sentences whose char spans partition
    the provision text; separator whitespace attaches to the preceding
    sentence."""
    text = provision.text
    if not text:
        return []
    boundaries: list[int] = []
    start = 0
    i = 0
    while i < len(text):
        if text[i] in _TERMINATORS and _is_boundary(text, i, start):
            end = i + 1
            while end < len(text) and text[end].isspace():
                end += 1
            boundaries.append(end)
            start = end
        i += 1
    if not boundaries or boundaries[-1] != len(text):
        boundaries.append(len(text))
    records = []
    begin = 0
    for k, end in enumerate(boundaries):
        if end <= begin:
            continue
        records.append(
            SentenceRecord(
                sentence_id=f"{provision.contract_id}-p{provision.index}-s{k}",
                contract_id=provision.contract_id,
                provision_index=provision.index,
                text=text[begin:end],
                char_span=(begin, end),
            )
        )
        begin = end
    return records


def expand_per_agent(
    sentences: Sequence[SentenceRecord], aliases: Sequence[AgentAlias]
) -> list[AgentSentence]:
    """One AgentSentence per (sentence, alias) where the alias occurs as
    a whole word (case-insensitive); alias-free sentences are dropped."""
    compiled = [
        (a, re.compile(r"\b" + re.escape(a.alias) + r"\b", re.IGNORECASE))
        for a in aliases
    ]
    out = []
    for sent in sentences:
        for alias, rx in compiled:
            if rx.search(sent.text):
                out.append(
                    AgentSentence(
                        sentence_id=sent.sentence_id,
                        contract_id=sent.contract_id,
                        agent=alias,
                        text=sent.text,
                    )
                )
    return out
