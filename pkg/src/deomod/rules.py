"""Deontic types, the trigger lexicon, the dependency rule engine, BIOS
tag conversion, and the two majority baselines.

Span convention throughout: (type, start, end) with token indices and an
inclusive end.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from typing import Iterable, Mapping, Sequence

from .errors import UsageError, ValidationError
from .lingrep import ParsedSentence

POLICY_ID = "precedence-v1"


class DeonticType(str, Enum):
    OBL = "Obl"
    ENT = "Ent"
    PRO = "Pro"
    PER = "Per"
    NOBL = "Nobl"
    NENT = "Nent"
    NONE = "None"

    @property
    def tag_suffix(self) -> str:
        if self is DeonticType.NONE:
            raise ValidationError("the None type has no tag suffix")
        return self.value.upper()


# Types that can carry trigger spans (everything except None).
SPAN_TYPES: tuple[DeonticType, ...] = (
    DeonticType.OBL,
    DeonticType.ENT,
    DeonticType.PRO,
    DeonticType.PER,
    DeonticType.NOBL,
    DeonticType.NENT,
)

ALL_TYPES: tuple[DeonticType, ...] = SPAN_TYPES + (DeonticType.NONE,)

# Fixed resolution precedence: negated obligation/entitlement first, then
# prohibition, permission, entitlement, obligation.
TYPE_PRECEDENCE: tuple[DeonticType, ...] = (
    DeonticType.NOBL,
    DeonticType.NENT,
    DeonticType.PRO,
    DeonticType.PER,
    DeonticType.ENT,
    DeonticType.OBL,
)

_SUFFIX_TO_TYPE = {t.value.upper(): t for t in SPAN_TYPES}

RESOLUTION_CONTEXTS = ("active-subject", "passive-agent", "conjunct")


def parse_type(name: str) -> DeonticType:
    for t in ALL_TYPES:
        if t.value == name:
            return t
    raise ValidationError(f"unknown deontic type {name!r}")


@dataclass(frozen=True)
class TriggerPattern:
    pattern: str
    tokens: tuple[str, ...]
    candidate_types: tuple[DeonticType, ...]


@dataclass(frozen=True)
class TriggerMatch:
    pattern: str
    start: int
    end: int  # inclusive
    candidate_types: tuple[DeonticType, ...]

    @property
    def first_index(self) -> int:
        return self.start


class TriggerLexicon:
    """Expanded trigger patterns, longest first, duplicates merged."""

    def __init__(self, patterns: Iterable[TriggerPattern]):
        merged: dict[str, list[DeonticType]] = {}
        for p in patterns:
            types = merged.setdefault(p.pattern, [])
            for t in p.candidate_types:
                if t not in types:
                    types.append(t)
        self.patterns: list[TriggerPattern] = []
        for pat, types in merged.items():
            ordered = tuple(sorted(types, key=TYPE_PRECEDENCE.index))
            self.patterns.append(
                TriggerPattern(pat, tuple(pat.split()), ordered)
            )
        # Longest first so matching prefers the most specific pattern;
        # alphabetical within a length for determinism.
        self.patterns.sort(key=lambda p: (-len(p.tokens), p.pattern))
        self.by_pattern = {p.pattern: p for p in self.patterns}

    def __len__(self) -> int:
        return len(self.patterns)

    def fingerprint(self) -> str:
        body = "\n".join(
            f"{p.pattern}\t{','.join(t.value for t in p.candidate_types)}"
            for p in sorted(self.patterns, key=lambda p: p.pattern)
        )
        return hashlib.sha256(body.encode("utf-8")).hexdigest()


def _expand_alternations(pattern: str) -> list[tuple[str, ...]]:
    slots = [tok.split("/") if "/" in tok else [tok] for tok in pattern.split()]
    return [tuple(combo) for combo in itertools.product(*slots)]


def parse_lexicon(text: str) -> TriggerLexicon:
    """Parse "type<TAB>pattern" lines; '#' comments and blanks ignored."""
    patterns: list[TriggerPattern] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "\t" not in line:
            raise ValidationError(
                f"lexicon line {lineno}: expected 'type<TAB>pattern'"
            )
        type_name, _, pattern = line.partition("\t")
        type_name = type_name.strip()
        pattern = pattern.strip().lower()
        if not pattern:
            raise ValidationError(f"lexicon line {lineno}: empty pattern")
        try:
            dtype = parse_type(type_name)
        except ValidationError:
            raise ValidationError(
                f"lexicon line {lineno}: unknown type tag {type_name!r}"
            ) from None
        if dtype is DeonticType.NONE:
            raise ValidationError(
                f"lexicon line {lineno}: the None type cannot carry triggers"
            )
        for tokens in _expand_alternations(pattern):
            patterns.append(TriggerPattern(" ".join(tokens), tokens, (dtype,)))
    return TriggerLexicon(patterns)


def load_lexicon(path) -> TriggerLexicon:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_lexicon(fh.read())


def load_default_lexicon() -> TriggerLexicon:
    text = (
        resources.files("deomod").joinpath("data/lexicon.tsv").read_text("utf-8")
    )
    return parse_lexicon(text)


def find_triggers(
    tokens: Sequence[str], lexicon: TriggerLexicon
) -> list[TriggerMatch]:
    """Token-level, case-insensitive, longest-match-wins, non-overlapping
    trigger scan. Each token index is consumed by at most one match."""
    lowered = [t.lower() for t in tokens]
    matches: list[TriggerMatch] = []
    i = 0
    n = len(lowered)
    while i < n:
        hit = None
        for p in lexicon.patterns:
            k = len(p.tokens)
            if i + k <= n and tuple(lowered[i : i + k]) == p.tokens:
                hit = p
                break
        if hit is None:
            i += 1
            continue
        matches.append(
            TriggerMatch(hit.pattern, i, i + len(hit.tokens) - 1, hit.candidate_types)
        )
        i += len(hit.tokens)
    return matches


def resolve_type(
    pattern: str,
    candidates: Sequence[DeonticType],
    context: str,
    policy: str = POLICY_ID,
) -> DeonticType:
    """Pick one type for a trigger. Single candidate wins outright; a
    passive agent prefers Ent for payment patterns and Obl otherwise;
    every other case falls back to the fixed precedence order."""
    if policy != POLICY_ID:
        raise UsageError(f"unknown resolution policy {policy!r}")
    if context not in RESOLUTION_CONTEXTS:
        raise UsageError(f"unknown syntactic context {context!r}")
    if not candidates:
        raise UsageError("resolve_type needs at least one candidate")
    if len(candidates) == 1:
        return candidates[0]
    if context == "passive-agent":
        preferred = (
            DeonticType.ENT if "be paid" in pattern else DeonticType.OBL
        )
        if preferred in candidates:
            return preferred
    for t in TYPE_PRECEDENCE:
        if t in candidates:
            return t
    raise UsageError("candidates contain no resolvable type")


@dataclass(frozen=True)
class Extraction:
    """One rule-engine hit: a typed trigger attributed to an agent.
    ``rule`` records which of the eight rules produced it."""

    deontic_type: DeonticType
    trigger: str
    agent: str
    start_index: int
    rule: int

    def to_dict(self) -> dict:
        return {
            "type": self.deontic_type.value,
            "trigger": self.trigger,
            "agent": self.agent,
            "start": self.start_index,
            "rule": self.rule,
        }


def _conj_children(sent: ParsedSentence, idx: int) -> list[int]:
    """Direct conj dependents plus one more conj hop (bounded traversal)."""
    first = [c for c in sent.children[idx] if sent.tokens[c].deprel == "conj"]
    out = list(first)
    for c in first:
        out.extend(
            g for g in sent.children[c] if sent.tokens[g].deprel == "conj"
        )
    return out


class _AliasIndex:
    def __init__(self, aliases: Sequence[str]):
        self.by_token: dict[str, str] = {}
        for alias in aliases:
            self.by_token.setdefault(alias.lower(), alias)
            # Multi-word aliases are matched by their head (last) word.
            last = alias.split()[-1].lower()
            self.by_token.setdefault(last, alias)

    def match(self, surface: str) -> str | None:
        return self.by_token.get(surface.lower())


def apply_dependency_rules(
    sentence: ParsedSentence,
    aliases: Sequence[str],
    lexicon: TriggerLexicon,
    policy: str = POLICY_ID,
) -> list[Extraction]:
    """Run the eight dependency rules over one parsed sentence.

    Rules fire from words that are the ROOT or carry VERB/AUX part of
    speech. A trigger participates through its first token, which must
    be an aux dependent sitting at a match start index.
    """
    toks = sentence.tokens
    matches = find_triggers(sentence.surfaces(), lexicon)
    match_at = {m.start: m for m in matches}
    alias_idx = _AliasIndex(aliases)

    results: list[Extraction] = []
    seen: set[tuple[DeonticType, str, str, int]] = set()

    def emit(dtype: DeonticType, trigger: str, agent: str, start: int, rule: int):
        key = (dtype, trigger, agent, start)
        if key not in seen:
            seen.add(key)
            results.append(Extraction(dtype, trigger, agent, start, rule))

    def aux_trigger_children(widx: int) -> list[TriggerMatch]:
        out = []
        for c in sentence.children[widx]:
            if toks[c].deprel == "aux" and c in match_at:
                out.append(match_at[c])
        return out

    def resolve(m: TriggerMatch, context: str) -> DeonticType:
        return resolve_type(m.pattern, m.candidate_types, context, policy)

    for w in range(len(toks)):
        word = toks[w]
        if word.deprel != "ROOT" and word.pos not in ("VERB", "AUX"):
            continue
        kids = sentence.children[w]
        triggers_here = aux_trigger_children(w)
        conj_verbs = [
            v for v in _conj_children(sentence, w)
            if toks[v].pos in ("VERB", "AUX")
        ]

        # Rules 1 and 2: alias subject of the word, trigger as aux child.
        subj_aliases = []
        for s in kids:
            if toks[s].deprel in ("nsubj", "nsubjpass"):
                alias = alias_idx.match(toks[s].surface)
                if alias is not None:
                    subj_aliases.append((s, alias))
        for m in triggers_here:
            for s, alias in subj_aliases:
                emit(resolve(m, "active-subject"), m.pattern, alias, m.start, 1)
                for conj in _conj_children(sentence, s):
                    a2 = alias_idx.match(toks[conj].surface)
                    if a2 is not None:
                        emit(
                            resolve(m, "active-subject"), m.pattern, a2, m.start, 2
                        )

        # Rules 3, 4, 5: passive with a by-agent carrying an alias.
        for g in kids:
            if toks[g].deprel != "agent":
                continue
            for child3 in sentence.children[g]:
                a1 = alias_idx.match(toks[child3].surface)
                if a1 is None:
                    continue
                for m in triggers_here:
                    emit(resolve(m, "passive-agent"), m.pattern, a1, m.start, 3)
                    for conj in _conj_children(sentence, child3):
                        a2 = alias_idx.match(toks[conj].surface)
                        if a2 is None:
                            continue
                        rule4_fired = False
                        for v in conj_verbs:
                            for t1 in aux_trigger_children(v):
                                emit(
                                    resolve(t1, "conjunct"),
                                    t1.pattern,
                                    a2,
                                    t1.start,
                                    4,
                                )
                                rule4_fired = True
                        if not rule4_fired:
                            emit(
                                resolve(m, "passive-agent"),
                                m.pattern,
                                a2,
                                m.start,
                                5,
                            )

        # Rule 6: alias conjoined under a pobj/dobj child, with a
        # conjoined verb carrying its own trigger.
        for d in kids:
            if toks[d].deprel not in ("pobj", "dobj"):
                continue
            conj_objs = _conj_children(sentence, d)
            for node in conj_objs:
                a1 = alias_idx.match(toks[node].surface)
                if a1 is None:
                    continue
                for v in conj_verbs:
                    for t1 in aux_trigger_children(v):
                        emit(
                            resolve(t1, "conjunct"), t1.pattern, a1, t1.start, 6
                        )

        # Rules 7 and 8: conjoined verbs with their own aux triggers.
        for m in triggers_here:
            bound_agent = next(
                (
                    e.agent
                    for e in results
                    if e.start_index == m.start and e.rule in (1, 3)
                ),
                None,
            )
            for v in conj_verbs:
                t1s = aux_trigger_children(v)
                if not t1s:
                    continue
                rule7_fired = False
                for g1 in sentence.children[v]:
                    if toks[g1].deprel != "agent":
                        continue
                    for node in sentence.children[g1]:
                        a2 = alias_idx.match(toks[node].surface)
                        if a2 is not None:
                            emit(
                                resolve(m, "conjunct"), m.pattern, a2, m.start, 7
                            )
                            rule7_fired = True
                if not rule7_fired and bound_agent is not None:
                    for t1 in t1s:
                        emit(
                            resolve(t1, "conjunct"),
                            t1.pattern,
                            bound_agent,
                            t1.start,
                            8,
                        )

    return results


def to_multilabel(
    extractions: Iterable[Extraction], agent: str
) -> frozenset[DeonticType]:
    """Label set for one agent; no extractions means {None}."""
    labels = frozenset(
        e.deontic_type for e in extractions if e.agent.lower() == agent.lower()
    )
    return labels if labels else frozenset({DeonticType.NONE})


# ---------------------------------------------------------------------------
# BIOS tags

TAG_OUTSIDE = "O"


def tag_vocabulary() -> list[str]:
    tags = [TAG_OUTSIDE]
    for t in SPAN_TYPES:
        for prefix in ("B", "I", "S"):
            tags.append(f"{prefix}-{t.tag_suffix}")
    return tags


_VOCAB = frozenset(tag_vocabulary())


def spans_to_tags(
    spans: Iterable[tuple[DeonticType, int, int]], length: int
) -> list[str]:
    """Render (type, start, end-inclusive) spans as a BIOS sequence."""
    tags = [TAG_OUTSIDE] * length
    occupied = [False] * length
    for dtype, start, end in spans:
        if dtype not in SPAN_TYPES:
            raise ValidationError(f"type {dtype} cannot carry a span")
        if not (0 <= start <= end < length):
            raise ValidationError(
                f"span ({start}, {end}) out of bounds for length {length}"
            )
        if any(occupied[start : end + 1]):
            raise ValidationError(f"span ({start}, {end}) overlaps another span")
        for i in range(start, end + 1):
            occupied[i] = True
        if start == end:
            tags[start] = f"S-{dtype.tag_suffix}"
        else:
            tags[start] = f"B-{dtype.tag_suffix}"
            for i in range(start + 1, end + 1):
                tags[i] = f"I-{dtype.tag_suffix}"
    return tags


def tags_to_spans(tags: Sequence[str]) -> list[tuple[DeonticType, int, int]]:
    """Strict inverse of spans_to_tags. Raises ValidationError on tags
    outside the vocabulary or an I- tag that does not continue a span
    of the same type."""
    spans: list[tuple[DeonticType, int, int]] = []
    open_type: DeonticType | None = None
    open_start = -1

    def close(upto: int) -> None:
        nonlocal open_type
        if open_type is not None:
            spans.append((open_type, open_start, upto))
            open_type = None

    for i, tag in enumerate(tags):
        if tag not in _VOCAB:
            raise ValidationError(f"unknown tag {tag!r} at index {i}")
        if tag == TAG_OUTSIDE:
            close(i - 1)
            continue
        prefix, _, suffix = tag.partition("-")
        dtype = _SUFFIX_TO_TYPE[suffix]
        if prefix == "S":
            close(i - 1)
            spans.append((dtype, i, i))
        elif prefix == "B":
            close(i - 1)
            open_type = dtype
            open_start = i
        else:  # I
            if open_type is not dtype:
                raise ValidationError(
                    f"I-{suffix} at index {i} does not continue a span"
                )
    close(len(tags) - 1)
    return spans


# ---------------------------------------------------------------------------
# Majority baselines

# Tie-break order for majority votes; None loses all ties.
MAJORITY_TIE_ORDER: tuple[DeonticType, ...] = SPAN_TYPES + (DeonticType.NONE,)


def majority_class_baseline(
    group_label_counts: Mapping[str, Mapping[DeonticType, int]],
    include_none: bool = True,
) -> dict[str, DeonticType]:
    """Majority label per agent group from training presence counts.

    Ties break by the fixed order Obl, Ent, Pro, Per, Nobl, Nent (then
    None). Set include_none=False to pick the majority span-bearing type.
    """
    out: dict[str, DeonticType] = {}
    for group, counts in group_label_counts.items():
        best: DeonticType | None = None
        best_count = -1
        for t in MAJORITY_TIE_ORDER:
            if t is DeonticType.NONE and not include_none:
                continue
            c = counts.get(t, 0)
            if c > best_count:
                best = t
                best_count = c
        if best is None or best_count <= 0:
            raise UsageError(f"no label counts for group {group!r}")
        out[group] = best
    return out


def majority_span_baseline(
    tokens: Sequence[str], majority_type: DeonticType
) -> list[str]:
    """Tag every "shall" token as a single-token span of the group's
    majority type; everything else is O."""
    if majority_type not in SPAN_TYPES:
        raise UsageError("majority span baseline needs a span-bearing type")
    return [
        f"S-{majority_type.tag_suffix}" if t.lower() == "shall" else TAG_OUTSIDE
        for t in tokens
    ]
