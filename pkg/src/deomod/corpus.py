"""Annotation corpus management: record IO, majority-vote merging, span
unions, inter-annotator reliability, contract-level splits, descriptive
statistics, and model-input export."""

from __future__ import annotations

import hashlib
import json
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Callable, Collection, Iterable, Mapping, Sequence

from .defaults import DEFAULT_ALIAS_GROUPS, MODAL_AUXILIARIES, group_marker, group_of
from .errors import ConfigurationError, ParseError, UsageError, ValidationError
from .rules import (
    ALL_TYPES,
    SPAN_TYPES,
    DeonticType,
    parse_type,
    spans_to_tags,
)

Span = tuple[DeonticType, int, int]


@dataclass(frozen=True)
class AnnotationRecord:
    """One (sentence, agent) annotation row.

    labels is the multi-label set ({None} exclusive of the rest); spans
    are (type, start, end-inclusive) token intervals whose types all
    appear in labels. tokens are optional but required by statistics
    and export."""

    sentence_id: str
    contract_id: str
    agent: str
    labels: frozenset[DeonticType]
    spans: tuple[Span, ...] = ()
    annotator_id: str | None = None
    split: str | None = None
    tokens: tuple[str, ...] | None = None

    def __post_init__(self):
        if not self.labels:
            raise ValidationError(
                f"{self.sentence_id}/{self.agent}: empty label set"
            )
        if DeonticType.NONE in self.labels and len(self.labels) > 1:
            raise ValidationError(
                f"{self.sentence_id}/{self.agent}: None must be exclusive"
            )
        per_type: dict[DeonticType, list[tuple[int, int]]] = defaultdict(list)
        for dtype, start, end in self.spans:
            if dtype not in self.labels:
                raise ValidationError(
                    f"{self.sentence_id}/{self.agent}: span type "
                    f"{dtype.value} not in labels"
                )
            if start < 0 or end < start:
                raise ValidationError(
                    f"{self.sentence_id}/{self.agent}: bad span ({start}, {end})"
                )
            if self.tokens is not None and end >= len(self.tokens):
                raise ValidationError(
                    f"{self.sentence_id}/{self.agent}: span ({start}, {end}) "
                    f"exceeds {len(self.tokens)} tokens"
                )
            per_type[dtype].append((start, end))
        for dtype, ivals in per_type.items():
            ivals.sort()
            for (s1, e1), (s2, e2) in zip(ivals, ivals[1:]):
                if s2 <= e1:
                    raise ValidationError(
                        f"{self.sentence_id}/{self.agent}: overlapping "
                        f"{dtype.value} spans"
                    )

    def span_surface(self, span: Span) -> str:
        if self.tokens is None:
            raise ConfigurationError(
                f"record {self.sentence_id}/{self.agent} carries no tokens"
            )
        _, start, end = span
        return " ".join(self.tokens[start : end + 1])

    def to_dict(self) -> dict:
        out: dict = {
            "sentence_id": self.sentence_id,
            "contract_id": self.contract_id,
            "agent": self.agent,
            "labels": sorted(t.value for t in self.labels),
            "spans": [
                {"type": t.value, "start": s, "end": e}
                for t, s, e in self.spans
            ],
        }
        if self.annotator_id is not None:
            out["annotator_id"] = self.annotator_id
        if self.split is not None:
            out["split"] = self.split
        if self.tokens is not None:
            out["tokens"] = list(self.tokens)
        return out


def record_from_dict(obj: Mapping, field_map: Mapping[str, str] | None = None) -> AnnotationRecord:
    """Build a record from a JSON object, optionally renaming source
    fields through field_map (source name -> canonical name)."""
    if field_map:
        obj = {field_map.get(k, k): v for k, v in obj.items()}
    try:
        labels = frozenset(parse_type(v) for v in obj["labels"])
        spans = tuple(
            (parse_type(s["type"]), int(s["start"]), int(s["end"]))
            for s in obj.get("spans", ())
        )
        tokens = obj.get("tokens")
        return AnnotationRecord(
            sentence_id=str(obj["sentence_id"]),
            contract_id=str(obj["contract_id"]),
            agent=str(obj["agent"]),
            labels=labels,
            spans=spans,
            annotator_id=obj.get("annotator_id"),
            split=obj.get("split"),
            tokens=tuple(tokens) if tokens is not None else None,
        )
    except KeyError as exc:
        raise ParseError(f"record missing field {exc.args[0]!r}") from None


def read_records(
    lines: Iterable[str], field_map: Mapping[str, str] | None = None
) -> list[AnnotationRecord]:
    records = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc.msg}", line=lineno) from None
        try:
            records.append(record_from_dict(obj, field_map))
        except ParseError as exc:
            raise ParseError(str(exc), line=lineno) from None
    return records


def write_records(records: Iterable[AnnotationRecord]) -> str:
    return "".join(
        json.dumps(r.to_dict(), ensure_ascii=False) + "\n" for r in records
    )


# ---------------------------------------------------------------------------
# Majority merging


@dataclass(frozen=True)
class MergeResult:
    record: AnnotationRecord | None
    discarded: bool
    union_merged: bool
    votes: dict[DeonticType, int] = field(default_factory=dict)


def union_spans(
    spans_by_annotator: Sequence[Iterable[tuple[int, int]]],
) -> tuple[list[tuple[int, int]], bool]:
    """Union inclusive token intervals across annotators, coalescing
    overlapping or adjacent intervals but never bridging gaps. The flag
    reports whether differing intervals from different annotators were
    merged together."""
    tagged: list[tuple[int, int, int]] = []
    for ann, spans in enumerate(spans_by_annotator):
        for start, end in spans:
            if start < 0 or end < start:
                raise ValidationError(f"bad interval ({start}, {end})")
            tagged.append((start, end, ann))
    if not tagged:
        return [], False
    tagged.sort(key=lambda t: (t[0], t[1]))
    merged: list[tuple[int, int]] = []
    flagged = False
    cur_start, cur_end, ann0 = tagged[0]
    sources = {(cur_start, cur_end, ann0)}
    for start, end, ann in tagged[1:]:
        if start <= cur_end + 1:
            cur_end = max(cur_end, end)
            sources.add((start, end, ann))
        else:
            flagged |= _union_flag(sources)
            merged.append((cur_start, cur_end))
            cur_start, cur_end = start, end
            sources = {(start, end, ann)}
    flagged |= _union_flag(sources)
    merged.append((cur_start, cur_end))
    return merged, flagged


def _union_flag(sources: set[tuple[int, int, int]]) -> bool:
    intervals = {(s, e) for s, e, _ in sources}
    annotators = {a for _, _, a in sources}
    return len(intervals) > 1 and len(annotators) > 1


def merge_majority(records: Sequence[AnnotationRecord]) -> MergeResult:
    """Majority-vote merge of one sentence/agent pair across annotators.

    A type survives with at least two of three votes (more generally a
    strict majority); surviving types get the union of their annotators'
    spans; no surviving vote discards the record."""
    if len(records) < 2:
        raise UsageError("need at least two annotators to merge")
    key = (records[0].sentence_id, records[0].agent)
    for r in records[1:]:
        if (r.sentence_id, r.agent) != key:
            raise UsageError(
                "merge_majority got records for different sentence/agent pairs"
            )
    tokens = None
    for r in records:
        if r.tokens is not None:
            if tokens is not None and tuple(r.tokens) != tokens:
                raise ValidationError(
                    f"{key[0]}/{key[1]}: annotators disagree on tokens"
                )
            tokens = tuple(r.tokens)

    threshold = len(records) // 2 + 1
    votes: dict[DeonticType, int] = {
        t: sum(1 for r in records if t in r.labels) for t in ALL_TYPES
    }
    kept = [t for t in ALL_TYPES if votes[t] >= threshold]
    if not kept:
        return MergeResult(None, True, False, votes)

    spans: list[Span] = []
    union_merged = False
    for t in kept:
        if t is DeonticType.NONE:
            continue
        per_annotator = [
            [(s, e) for (dt, s, e) in r.spans if dt is t] for r in records
        ]
        merged, flagged = union_spans(per_annotator)
        union_merged |= flagged
        spans.extend((t, s, e) for s, e in merged)

    record = AnnotationRecord(
        sentence_id=records[0].sentence_id,
        contract_id=records[0].contract_id,
        agent=records[0].agent,
        labels=frozenset(kept),
        spans=tuple(spans),
        split=records[0].split,
        tokens=tokens,
    )
    return MergeResult(record, False, union_merged, votes)


# ---------------------------------------------------------------------------
# Reliability


@dataclass
class ReliabilityData:
    """items x annotators matrix of nominal values; None marks missing."""

    matrix: list[list[object]]

    def __post_init__(self):
        widths = {len(row) for row in self.matrix}
        if len(widths) > 1:
            raise ValidationError("reliability matrix rows differ in width")


def krippendorff_alpha_nominal(data: ReliabilityData) -> float:
    """Krippendorff's alpha for nominal data via the coincidence-matrix
    formulation. Items with fewer than two values are skipped; fewer
    than two pairable values overall is an error."""
    units = [
        [v for v in row if v is not None]
        for row in data.matrix
    ]
    units = [u for u in units if len(u) >= 2]
    n = sum(len(u) for u in units)
    if n < 2:
        raise UsageError("fewer than two pairable values; alpha is undefined")

    coincidence: dict[tuple[object, object], float] = defaultdict(float)
    for unit in units:
        m = len(unit)
        for i, vi in enumerate(unit):
            for j, vj in enumerate(unit):
                if i != j:
                    coincidence[(vi, vj)] += 1.0 / (m - 1)

    totals: dict[object, float] = defaultdict(float)
    for (vi, _), weight in coincidence.items():
        totals[vi] += weight
    total = sum(totals.values())

    observed = sum(w for (vi, vj), w in coincidence.items() if vi != vj)
    expected = 0.0
    for vi, ni in totals.items():
        for vj, nj in totals.items():
            if vi != vj:
                expected += ni * nj
    if total <= 1:
        raise UsageError("fewer than two pairable values; alpha is undefined")
    d_o = observed / total
    d_e = expected / (total * (total - 1))
    if d_e == 0.0:
        # Single category everywhere: perfect agreement by definition.
        return 1.0
    return 1.0 - d_o / d_e


def token_alpha(
    span_sets: Sequence[Sequence[Span] | None],
    length: int,
    majority_types: Collection[DeonticType],
) -> ReliabilityData:
    """Per-token nominal values for one sentence: each annotator labels
    each token with the majority-type span covering it, or "O". A None
    entry marks an annotator who did not label the sentence. Tokens
    covered by two majority types take the earlier-starting span
    (ties: fixed type order)."""
    majority = [t for t in SPAN_TYPES if t in majority_types]
    columns: list[list[object]] = []
    for spans in span_sets:
        if spans is None:
            columns.append([None] * length)
            continue
        values: list[object] = ["O"] * length
        claim: list[tuple[int, int] | None] = [None] * length
        for dtype, start, end in spans:
            if dtype not in majority:
                continue
            rank = (start, SPAN_TYPES.index(dtype))
            for i in range(start, min(end + 1, length)):
                if claim[i] is None or rank < claim[i]:
                    claim[i] = rank
                    values[i] = dtype.value
        columns.append(values)
    matrix = [[col[i] for col in columns] for i in range(length)]
    return ReliabilityData(matrix)


# ---------------------------------------------------------------------------
# Contract-level splits


def split_by_contract(
    records: Sequence[AnnotationRecord],
    ratios: Mapping[str, float],
    seed: int = 0,
    pins: Mapping[str, str] | None = None,
) -> dict[str, str]:
    """Assign whole contracts to splits by greedy bin-packing toward the
    requested ratios. Pinned contracts are honored first. Deterministic
    for a given seed (the seed shuffles equal-sized contracts)."""
    if not ratios:
        raise UsageError("no split ratios given")
    total_ratio = sum(ratios.values())
    if total_ratio <= 0:
        raise UsageError("split ratios must sum to a positive value")
    pins = dict(pins or {})
    for split in pins.values():
        if split not in ratios:
            raise UsageError(f"pin targets unknown split {split!r}")

    counts = Counter(r.contract_id for r in records)
    if len(counts) < len(ratios):
        raise UsageError(
            f"cannot form {len(ratios)} splits from {len(counts)} contracts"
        )
    unknown_pins = set(pins) - set(counts)
    if unknown_pins:
        raise UsageError(f"pinned contracts not in corpus: {sorted(unknown_pins)}")

    total = sum(counts.values())
    targets = {s: total * r / total_ratio for s, r in ratios.items()}
    assigned: dict[str, str] = {}
    filled = {s: 0 for s in ratios}
    for contract, split in pins.items():
        assigned[contract] = split
        filled[split] += counts[contract]

    remaining = [c for c in counts if c not in pins]
    rng = random.Random(seed)
    # Stable order within one size class, then a seeded shuffle of ties.
    by_size: dict[int, list[str]] = defaultdict(list)
    for c in sorted(remaining):
        by_size[counts[c]].append(c)
    ordered: list[str] = []
    for size in sorted(by_size, reverse=True):
        group = by_size[size]
        rng.shuffle(group)
        ordered.extend(group)

    split_order = list(ratios)
    for contract in ordered:
        deficits = {s: targets[s] - filled[s] for s in split_order}
        best = max(split_order, key=lambda s: deficits[s])
        assigned[contract] = best
        filled[best] += counts[contract]
    return assigned


def apply_split(
    records: Sequence[AnnotationRecord], assignment: Mapping[str, str]
) -> list[AnnotationRecord]:
    out = []
    for r in records:
        split = assignment.get(r.contract_id)
        if split is None:
            raise UsageError(f"contract {r.contract_id!r} has no split")
        out.append(
            AnnotationRecord(
                sentence_id=r.sentence_id,
                contract_id=r.contract_id,
                agent=r.agent,
                labels=r.labels,
                spans=r.spans,
                annotator_id=r.annotator_id,
                split=split,
                tokens=r.tokens,
            )
        )
    return out


# ---------------------------------------------------------------------------
# Statistics


def compute_stats(
    records: Sequence[AnnotationRecord],
    alias_groups: Mapping[str, str] | None = None,
    modal_auxiliaries: Sequence[str] = MODAL_AUXILIARIES,
    top_k: int = 10,
) -> dict:
    """Descriptive corpus statistics.

    Per split: record count, label-instance count (one per non-None
    label, one for a {None} record), per-type supports, trigger-span
    count. Corpus-wide: trigger surface inventory, shall share,
    multi-trigger shares, modal/non-modal shares, per-group type
    distribution."""
    if not records:
        raise UsageError("no records")
    groups = dict(DEFAULT_ALIAS_GROUPS if alias_groups is None else alias_groups)
    modals = {m.lower() for m in modal_auxiliaries}

    splits: dict[str, dict] = {}
    surface_counts: Counter[str] = Counter()
    surface_by_type: dict[str, Counter] = {t.value: Counter() for t in SPAN_TYPES}
    group_type_counts: dict[str, Counter] = defaultdict(Counter)
    multi_trigger = 0
    multi_type_among_multi = 0
    none_records = 0
    total_spans = 0

    for r in records:
        split = r.split or "all"
        st = splits.setdefault(
            split,
            {
                "records": 0,
                "label_instances": 0,
                "trigger_spans": 0,
                "supports": {t.value: 0 for t in ALL_TYPES},
            },
        )
        st["records"] += 1
        if r.labels == frozenset({DeonticType.NONE}):
            st["label_instances"] += 1
            st["supports"]["None"] += 1
            none_records += 1
        else:
            st["label_instances"] += len(r.labels)
            for t in r.labels:
                st["supports"][t.value] += 1
        st["trigger_spans"] += len(r.spans)
        total_spans += len(r.spans)

        group = group_of(r.agent, groups)
        for t in r.labels:
            group_type_counts[group][t.value] += 1

        if len(r.spans) >= 2:
            multi_trigger += 1
            if len({t for t, _, _ in r.spans}) >= 2:
                multi_type_among_multi += 1
        for span in r.spans:
            surface = r.span_surface(span).lower()
            surface_counts[surface] += 1
            surface_by_type[span[0].value][surface] += 1

    unique = sorted(surface_counts)
    modal_unique = [
        s for s in unique if any(tok in modals for tok in s.split())
    ]
    nonmodal_unique = [s for s in unique if s not in set(modal_unique)]
    nonmodal_spans = sum(surface_counts[s] for s in nonmodal_unique)
    shall = surface_counts.get("shall", 0)

    n = len(records)
    return {
        "records": n,
        "splits": splits,
        "unique_triggers": len(unique),
        "trigger_spans": total_spans,
        "shall_spans": shall,
        "shall_share_pct": 100.0 * shall / total_spans if total_spans else 0.0,
        "multi_trigger_pct": 100.0 * multi_trigger / n,
        "multi_type_among_multi_trigger_pct": (
            100.0 * multi_type_among_multi / multi_trigger if multi_trigger else 0.0
        ),
        "none_pct": 100.0 * none_records / n,
        "modal_unique_triggers": len(modal_unique),
        "nonmodal_unique_triggers": len(nonmodal_unique),
        "nonmodal_unique_pct": (
            100.0 * len(nonmodal_unique) / len(unique) if unique else 0.0
        ),
        "nonmodal_span_pct": (
            100.0 * nonmodal_spans / total_spans if total_spans else 0.0
        ),
        "group_type_counts": {
            g: dict(c) for g, c in sorted(group_type_counts.items())
        },
        "top_triggers_by_type": {
            t: counter.most_common(top_k)
            for t, counter in surface_by_type.items()
        },
    }


def stats_tables(stats: Mapping) -> dict[str, str]:
    """CSV renderings of the split table and top-trigger table."""
    lines = ["split,records,label_instances," + ",".join(t.value for t in ALL_TYPES)]
    for split in sorted(stats["splits"]):
        st = stats["splits"][split]
        row = [split, str(st["records"]), str(st["label_instances"])]
        row += [str(st["supports"][t.value]) for t in ALL_TYPES]
        lines.append(",".join(row))
    split_csv = "\n".join(lines) + "\n"

    lines = ["type,trigger,count"]
    for t in SPAN_TYPES:
        for surface, count in stats["top_triggers_by_type"].get(t.value, []):
            lines.append(f"{t.value},{surface},{count}")
    triggers_csv = "\n".join(lines) + "\n"
    return {"splits": split_csv, "top_triggers": triggers_csv}


# ---------------------------------------------------------------------------
# Conditioned export

EXPORT_MODES = ("agent-token", "anonymize-consistent", "anonymize-random")

ANON_POOL = tuple(f"a{i}" for i in range(1, 11))


def _stable_rng(seed: int, *parts: str) -> random.Random:
    digest = hashlib.sha256(
        (str(seed) + "\x1f" + "\x1f".join(parts)).encode("utf-8")
    ).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def _replace_alias_tokens(
    tokens: Sequence[str],
    spans: Sequence[Span],
    replacements: Mapping[str, str],
) -> tuple[list[str], list[Span]]:
    """Replace alias tokens (matched case-insensitively, multi-word
    aliases as consecutive token runs) with single replacement tokens,
    remapping span indices."""
    lowered = [t.lower() for t in tokens]
    multi = sorted(
        ((a.split(), rep) for a, rep in replacements.items()),
        key=lambda item: -len(item[0]),
    )
    new_tokens: list[str] = []
    index_map: list[int] = []  # old index -> new index
    i = 0
    while i < len(tokens):
        hit = None
        for alias_tokens, rep in multi:
            k = len(alias_tokens)
            if lowered[i : i + k] == [a.lower() for a in alias_tokens]:
                hit = (k, rep)
                break
        if hit is None:
            index_map.append(len(new_tokens))
            new_tokens.append(tokens[i])
            i += 1
        else:
            k, rep = hit
            pos = len(new_tokens)
            new_tokens.append(rep)
            index_map.extend([pos] * k)
            i += k
    new_spans: list[Span] = []
    for dtype, start, end in spans:
        ns, ne = index_map[start], index_map[end]
        # A span edge may not fall strictly inside a collapsed alias run.
        if start > 0 and index_map[start - 1] == ns and ns != index_map[end]:
            raise ValidationError("span boundary falls inside a replaced alias")
        if end + 1 < len(tokens) and index_map[end + 1] == ne and ne != ns:
            raise ValidationError("span boundary falls inside a replaced alias")
        new_spans.append((dtype, ns, ne))
    return new_tokens, new_spans


def export_conditioned(
    records: Sequence[AnnotationRecord],
    mode: str,
    alias_groups: Mapping[str, str] | None = None,
    seed: int = 0,
) -> list[dict]:
    """Model-ready rows with agent conditioning.

    agent-token prefixes the agent-group marker; anonymize-consistent
    rewrites each alias to one pool token corpus-wide; anonymize-random
    draws per-sentence (seeded, stable per sentence/agent)."""
    if mode not in EXPORT_MODES:
        raise UsageError(f"unknown export mode {mode!r}")
    groups = dict(DEFAULT_ALIAS_GROUPS if alias_groups is None else alias_groups)
    reserved = set(ANON_POOL) | {
        group_marker(g) for g in set(groups.values())
    }

    consistent_map: dict[str, str] = {}
    if mode == "anonymize-consistent":
        seen: list[str] = []
        for r in records:
            a = r.agent.lower()
            if a not in seen:
                seen.append(a)
        if len(seen) > len(ANON_POOL):
            raise UsageError("more aliases than anonymization pool tokens")
        consistent_map = {a: ANON_POOL[i] for i, a in enumerate(seen)}

    rows: list[dict] = []
    for r in records:
        if r.tokens is None:
            raise ConfigurationError(
                f"record {r.sentence_id}/{r.agent} carries no tokens"
            )
        if r.agent.lower() in {t.lower() for t in reserved}:
            raise ValidationError(
                f"alias {r.agent!r} collides with a reserved token"
            )
        tokens = list(r.tokens)
        spans = list(r.spans)
        agent_repr = r.agent
        if mode == "agent-token":
            marker = group_marker(group_of(r.agent, groups))
            tokens = [marker] + tokens
            spans = [(t, s + 1, e + 1) for t, s, e in spans]
            agent_repr = marker
        elif mode == "anonymize-consistent":
            tokens, spans = _replace_alias_tokens(
                tokens, spans, {r.agent: consistent_map[r.agent.lower()]}
            )
            agent_repr = consistent_map[r.agent.lower()]
        else:  # anonymize-random
            rng = _stable_rng(seed, r.sentence_id, r.agent)
            choice = rng.choice(ANON_POOL)
            tokens, spans = _replace_alias_tokens(
                tokens, spans, {r.agent: choice}
            )
            agent_repr = choice
        tags = spans_to_tags(
            [(t, s, e) for t, s, e in spans], len(tokens)
        ) if spans else ["O"] * len(tokens)
        rows.append(
            {
                "sentence_id": r.sentence_id,
                "agent": agent_repr,
                "tokens": tokens,
                "labels": sorted(t.value for t in r.labels),
                "tags": tags,
            }
        )
    return rows
