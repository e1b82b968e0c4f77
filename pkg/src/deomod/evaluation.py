"""Metrics: multi-label classification, entity-level span matching in
labeled and unlabeled modes, and the red-flag binary harness.

Zero denominators score 0.0 and are recorded in the report's
zero_division_flags rather than raising.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Collection, Mapping, Sequence

from .errors import UsageError, ValidationError
from .rules import (
    ALL_TYPES,
    SPAN_TYPES,
    DeonticType,
    TAG_OUTSIDE,
    tag_vocabulary,
)

_VOCAB = frozenset(tag_vocabulary())
_SUFFIX_TO_TYPE = {t.value.upper(): t for t in SPAN_TYPES}


@dataclass(frozen=True)
class ClassScores:
    precision: float
    recall: float
    f1: float
    support: int
    predicted: int


@dataclass
class MetricsReport:
    mode: str
    accuracy: float
    per_class: dict[str, ClassScores]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    micro_precision: float
    micro_recall: float
    micro_f1: float
    included_classes: list[str]
    zero_division_flags: list[str] = field(default_factory=list)
    repairs: int = 0

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "accuracy": self.accuracy,
            "per_class": {
                name: {
                    "precision": s.precision,
                    "recall": s.recall,
                    "f1": s.f1,
                    "support": s.support,
                    "predicted": s.predicted,
                }
                for name, s in self.per_class.items()
            },
            "macro": {
                "precision": self.macro_precision,
                "recall": self.macro_recall,
                "f1": self.macro_f1,
            },
            "micro": {
                "precision": self.micro_precision,
                "recall": self.micro_recall,
                "f1": self.micro_f1,
            },
            "included_classes": self.included_classes,
            "zero_division_flags": self.zero_division_flags,
            "repairs": self.repairs,
        }

    def summary_row(self) -> dict[str, float]:
        """Accuracy/P/R/F1 scaled to percentages, two decimals."""
        return {
            "accuracy": round(self.accuracy * 100, 2),
            "precision": round(self.macro_precision * 100, 2),
            "recall": round(self.macro_recall * 100, 2),
            "f1": round(self.macro_f1 * 100, 2),
        }


def _prf(tp: int, fp: int, fn: int, flags: list[str], name: str):
    if tp + fp == 0:
        precision = 0.0
        flags.append(f"{name}:precision")
    else:
        precision = tp / (tp + fp)
    if tp + fn == 0:
        recall = 0.0
        flags.append(f"{name}:recall")
    else:
        recall = tp / (tp + fn)
    if precision + recall == 0.0:
        f1 = 0.0
        if tp + fp + fn > 0:
            flags.append(f"{name}:f1")
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return precision, recall, f1


def _macro(values: list[float], flags: list[str], name: str) -> float:
    if not values:
        flags.append(f"{name}:macro")
        return 0.0
    return sum(values) / len(values)


def _validate_labelset(labels: Collection[DeonticType], where: str) -> frozenset:
    s = frozenset(labels)
    if not s:
        raise ValidationError(f"{where}: empty label set (use {{None}})")
    if DeonticType.NONE in s and len(s) > 1:
        raise ValidationError(f"{where}: None must be exclusive")
    return s


def classification_metrics(
    golds: Sequence[Collection[DeonticType]],
    preds: Sequence[Collection[DeonticType]],
    macro_over_all_classes: bool = False,
) -> MetricsReport:
    """Per-class binary presence P/R/F1, macro over classes with gold or
    predicted support (all 7 with the switch), and exact-set accuracy."""
    if len(golds) != len(preds):
        raise UsageError(
            f"gold/prediction length mismatch: {len(golds)} vs {len(preds)}"
        )
    gold_sets = [_validate_labelset(g, f"gold[{i}]") for i, g in enumerate(golds)]
    pred_sets = [_validate_labelset(p, f"pred[{i}]") for i, p in enumerate(preds)]

    flags: list[str] = []
    per_class: dict[str, ClassScores] = {}
    included: list[str] = []
    macro_p, macro_r, macro_f = [], [], []
    tp_all = fp_all = fn_all = 0

    for t in ALL_TYPES:
        tp = sum(1 for g, p in zip(gold_sets, pred_sets) if t in g and t in p)
        fp = sum(1 for g, p in zip(gold_sets, pred_sets) if t not in g and t in p)
        fn = sum(1 for g, p in zip(gold_sets, pred_sets) if t in g and t not in p)
        support = tp + fn
        predicted = tp + fp
        p, r, f = _prf(tp, fp, fn, flags, t.value)
        per_class[t.value] = ClassScores(p, r, f, support, predicted)
        if macro_over_all_classes or support > 0 or predicted > 0:
            included.append(t.value)
            macro_p.append(p)
            macro_r.append(r)
            macro_f.append(f)
        tp_all += tp
        fp_all += fp
        fn_all += fn

    if gold_sets:
        accuracy = sum(
            1 for g, p in zip(gold_sets, pred_sets) if g == p
        ) / len(gold_sets)
    else:
        accuracy = 0.0
        flags.append("accuracy:empty")

    mi_p, mi_r, mi_f = _prf(tp_all, fp_all, fn_all, flags, "micro")
    return MetricsReport(
        mode="classification",
        accuracy=accuracy,
        per_class=per_class,
        macro_precision=_macro(macro_p, flags, "precision"),
        macro_recall=_macro(macro_r, flags, "recall"),
        macro_f1=_macro(macro_f, flags, "f1"),
        micro_precision=mi_p,
        micro_recall=mi_r,
        micro_f1=mi_f,
        included_classes=included,
        zero_division_flags=flags,
    )


def extract_entities(
    tags: Sequence[str],
) -> tuple[list[tuple[DeonticType, int, int]], int]:
    """Entities from a possibly ill-formed tag sequence.

    An I-X that does not continue an X span is read as B-X; the return
    value counts how many such repairs were applied.
    """
    entities: list[tuple[DeonticType, int, int]] = []
    repairs = 0
    open_type: DeonticType | None = None
    open_start = -1

    def close(upto: int) -> None:
        nonlocal open_type
        if open_type is not None:
            entities.append((open_type, open_start, upto))
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
            entities.append((dtype, i, i))
        elif prefix == "B":
            close(i - 1)
            open_type = dtype
            open_start = i
        else:  # I
            if open_type is not dtype:
                repairs += 1
                close(i - 1)
                open_type = dtype
                open_start = i
    close(len(tags) - 1)
    return entities, repairs


def erase_types(tags: Sequence[str]) -> list[str]:
    """Collapse all six span types onto one, keeping the O/B/I/S shape."""
    out = []
    for i, tag in enumerate(tags):
        if tag not in _VOCAB:
            raise ValidationError(f"unknown tag {tag!r} at index {i}")
        if tag == TAG_OUTSIDE:
            out.append(tag)
        else:
            out.append(f"{tag[0]}-SPAN")
    return out


def _erased_entities(tags: Sequence[str]) -> tuple[list[tuple[int, int]], int]:
    entities: list[tuple[int, int]] = []
    repairs = 0
    open_start: int | None = None
    for i, tag in enumerate(erase_types(tags)):
        if tag == TAG_OUTSIDE:
            if open_start is not None:
                entities.append((open_start, i - 1))
                open_start = None
        elif tag == "S-SPAN":
            if open_start is not None:
                entities.append((open_start, i - 1))
                open_start = None
            entities.append((i, i))
        elif tag == "B-SPAN":
            if open_start is not None:
                entities.append((open_start, i - 1))
            open_start = i
        else:  # I-SPAN
            if open_start is None:
                repairs += 1
                open_start = i
    if open_start is not None:
        entities.append((open_start, len(tags) - 1))
    return entities, repairs


def span_metrics(
    gold_tags: Sequence[Sequence[str]],
    pred_tags: Sequence[Sequence[str]],
    labeled: bool = True,
    macro_over_all_types: bool = False,
) -> MetricsReport:
    """Entity-level span metrics over BIOS sequences.

    Labeled mode matches (type, start, end); unlabeled mode erases the
    types, re-extracts, and matches (start, end). Accuracy is token-level
    tag accuracy in the evaluated (possibly erased) space. Macro averages
    types with gold or predicted support.
    """
    if len(gold_tags) != len(pred_tags):
        raise UsageError(
            f"gold/prediction length mismatch: {len(gold_tags)} vs {len(pred_tags)}"
        )
    for i, (g, p) in enumerate(zip(gold_tags, pred_tags)):
        if len(g) != len(p):
            raise UsageError(f"record {i}: tag sequence lengths differ")

    flags: list[str] = []
    repairs = 0
    total_tokens = 0
    agree_tokens = 0

    if labeled:
        gold_by_type: dict[DeonticType, list] = {t: [] for t in SPAN_TYPES}
        pred_by_type: dict[DeonticType, list] = {t: [] for t in SPAN_TYPES}
        for i, (g, p) in enumerate(zip(gold_tags, pred_tags)):
            ge, rg = extract_entities(g)
            pe, rp = extract_entities(p)
            repairs += rg + rp
            for t, s, e in ge:
                gold_by_type[t].append((i, s, e))
            for t, s, e in pe:
                pred_by_type[t].append((i, s, e))
            total_tokens += len(g)
            agree_tokens += sum(1 for a, b in zip(g, p) if a == b)

        per_class: dict[str, ClassScores] = {}
        included: list[str] = []
        macro_p, macro_r, macro_f = [], [], []
        tp_all = fp_all = fn_all = 0
        for t in SPAN_TYPES:
            gold_set = set(gold_by_type[t])
            pred_set = set(pred_by_type[t])
            tp = len(gold_set & pred_set)
            fp = len(pred_set - gold_set)
            fn = len(gold_set - pred_set)
            p, r, f = _prf(tp, fp, fn, flags, t.value)
            per_class[t.value] = ClassScores(p, r, f, len(gold_set), len(pred_set))
            if macro_over_all_types or gold_set or pred_set:
                included.append(t.value)
                macro_p.append(p)
                macro_r.append(r)
                macro_f.append(f)
            tp_all += tp
            fp_all += fp
            fn_all += fn
        mode = "span-labeled"
    else:
        gold_spans: set[tuple[int, int, int]] = set()
        pred_spans: set[tuple[int, int, int]] = set()
        for i, (g, p) in enumerate(zip(gold_tags, pred_tags)):
            ge, rg = _erased_entities(g)
            pe, rp = _erased_entities(p)
            repairs += rg + rp
            gold_spans.update((i, s, e) for s, e in ge)
            pred_spans.update((i, s, e) for s, e in pe)
            eg = erase_types(g)
            ep = erase_types(p)
            total_tokens += len(eg)
            agree_tokens += sum(1 for a, b in zip(eg, ep) if a == b)

        tp_all = len(gold_spans & pred_spans)
        fp_all = len(pred_spans - gold_spans)
        fn_all = len(gold_spans - pred_spans)
        p, r, f = _prf(tp_all, fp_all, fn_all, flags, "span")
        per_class = {
            "span": ClassScores(p, r, f, len(gold_spans), len(pred_spans))
        }
        included = ["span"] if (gold_spans or pred_spans or macro_over_all_types) else []
        macro_p = [p] if included else []
        macro_r = [r] if included else []
        macro_f = [f] if included else []
        mode = "span-unlabeled"

    accuracy = agree_tokens / total_tokens if total_tokens else 0.0
    if not total_tokens:
        flags.append("accuracy:empty")
    mi_p, mi_r, mi_f = _prf(tp_all, fp_all, fn_all, flags, "micro")
    return MetricsReport(
        mode=mode,
        accuracy=accuracy,
        per_class=per_class,
        macro_precision=_macro(macro_p, flags, "precision"),
        macro_recall=_macro(macro_r, flags, "recall"),
        macro_f1=_macro(macro_f, flags, "f1"),
        micro_precision=mi_p,
        micro_recall=mi_r,
        micro_f1=mi_f,
        included_classes=included,
        zero_division_flags=flags,
        repairs=repairs,
    )


def redflag_metrics(
    gold_positive: Sequence[bool],
    per_alias_predictions: Sequence[Mapping[str, Collection[DeonticType]] | None],
) -> MetricsReport:
    """Binary sentence-level harness: a sentence is predicted positive
    when any alias carries a non-None type; alias-free sentences (None
    entries) are predicted negative."""
    if len(gold_positive) != len(per_alias_predictions):
        raise UsageError(
            "gold/prediction length mismatch: "
            f"{len(gold_positive)} vs {len(per_alias_predictions)}"
        )
    flags: list[str] = []
    tp = fp = fn = tn = 0
    for gold, by_alias in zip(gold_positive, per_alias_predictions):
        if by_alias is None:
            pred = False
        else:
            pred = any(
                any(t is not DeonticType.NONE for t in labels)
                for labels in by_alias.values()
            )
        if pred and gold:
            tp += 1
        elif pred:
            fp += 1
        elif gold:
            fn += 1
        else:
            tn += 1
    p, r, f = _prf(tp, fp, fn, flags, "positive")
    total = tp + fp + fn + tn
    accuracy = (tp + tn) / total if total else 0.0
    if not total:
        flags.append("accuracy:empty")
    per_class = {"positive": ClassScores(p, r, f, tp + fn, tp + fp)}
    return MetricsReport(
        mode="redflag",
        accuracy=accuracy,
        per_class=per_class,
        macro_precision=p,
        macro_recall=r,
        macro_f1=f,
        micro_precision=p,
        micro_recall=r,
        micro_f1=f,
        included_classes=["positive"],
        zero_division_flags=flags,
    )
