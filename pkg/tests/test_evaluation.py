import math
import random

import pytest
from sklearn.metrics import accuracy_score, precision_recall_fscore_support

from deomod.errors import UsageError, ValidationError
from deomod.evaluation import (
    classification_metrics,
    erase_types,
    extract_entities,
    redflag_metrics,
    span_metrics,
)
from deomod.rules import ALL_TYPES, SPAN_TYPES, DeonticType, spans_to_tags

OBL, ENT, PRO, PER = (
    DeonticType.OBL,
    DeonticType.ENT,
    DeonticType.PRO,
    DeonticType.PER,
)
NOBL, NENT, NONE = DeonticType.NOBL, DeonticType.NENT, DeonticType.NONE


def close(a, b, tol=1e-9):
    return math.isclose(a, b, rel_tol=0, abs_tol=tol)


# ---------------------------------------------------------------------------
# Classification metrics


def random_labelset(rng: random.Random) -> frozenset:
    if rng.random() < 0.3:
        return frozenset({NONE})
    k = rng.choice((1, 1, 1, 2, 2, 3))
    return frozenset(rng.sample(SPAN_TYPES, k))


def sklearn_reference(golds, preds):
    y_true = [[1 if t in g else 0 for t in ALL_TYPES] for g in golds]
    y_pred = [[1 if t in p else 0 for t in ALL_TYPES] for p in preds]
    prec, rec, f1, support = precision_recall_fscore_support(
        y_true, y_pred, average=None, zero_division=0, labels=range(len(ALL_TYPES))
    )
    predicted = [sum(row[i] for row in y_pred) for i in range(len(ALL_TYPES))]
    mi_p, mi_r, mi_f, _ = precision_recall_fscore_support(
        y_true, y_pred, average="micro", zero_division=0
    )
    return {
        "per_class": {
            t.value: (prec[i], rec[i], f1[i], int(support[i]), predicted[i])
            for i, t in enumerate(ALL_TYPES)
        },
        "accuracy": accuracy_score(y_true, y_pred),
        "micro": (mi_p, mi_r, mi_f),
    }


def test_classification_matches_reference_on_random_corpora():
    rng = random.Random(20240917)
    for _ in range(200):
        n = rng.randint(1, 40)
        golds = [random_labelset(rng) for _ in range(n)]
        preds = [random_labelset(rng) for _ in range(n)]
        report = classification_metrics(golds, preds)
        ref = sklearn_reference(golds, preds)
        assert close(report.accuracy, ref["accuracy"])
        included_p, included_r, included_f = [], [], []
        for t in ALL_TYPES:
            rp, rr, rf, rsup, rpred = ref["per_class"][t.value]
            mine = report.per_class[t.value]
            assert close(mine.precision, rp), t
            assert close(mine.recall, rr), t
            assert close(mine.f1, rf), t
            assert mine.support == rsup and mine.predicted == rpred
            if rsup > 0 or rpred > 0:
                included_p.append(rp)
                included_r.append(rr)
                included_f.append(rf)
        assert close(report.macro_precision, sum(included_p) / len(included_p))
        assert close(report.macro_recall, sum(included_r) / len(included_r))
        assert close(report.macro_f1, sum(included_f) / len(included_f))
        assert close(report.micro_precision, ref["micro"][0])
        assert close(report.micro_recall, ref["micro"][1])
        assert close(report.micro_f1, ref["micro"][2])


def test_classification_hand_example():
    golds = [{OBL}, {OBL, PER}, {NONE}, {ENT}]
    preds = [{OBL}, {OBL}, {ENT}, {NONE}]
    report = classification_metrics(golds, preds)
    # Obl: tp=2 fp=0 fn=0; Ent: tp=0 fp=1 fn=1; Per: tp=0 fp=0 fn=1;
    # None: tp=0 fp=1 fn=1. Exact-set accuracy: 1 of 4.
    assert close(report.accuracy, 0.25)
    assert report.per_class["Obl"].f1 == 1.0
    assert report.per_class["Ent"].f1 == 0.0
    assert report.included_classes == ["Obl", "Ent", "Per", "None"]
    assert close(report.macro_precision, (1.0 + 0.0 + 0.0 + 0.0) / 4)
    # Per's precision has no predictions: flagged, scored 0
    assert "Per:precision" in report.zero_division_flags


def test_classification_macro_over_all_classes_switch():
    golds = [{OBL}]
    preds = [{OBL}]
    narrow = classification_metrics(golds, preds)
    wide = classification_metrics(golds, preds, macro_over_all_classes=True)
    assert narrow.included_classes == ["Obl"]
    assert narrow.macro_f1 == 1.0
    assert len(wide.included_classes) == 7
    assert close(wide.macro_f1, 1.0 / 7)


def test_classification_validates_inputs():
    with pytest.raises(UsageError):
        classification_metrics([{OBL}], [{OBL}, {ENT}])
    with pytest.raises(ValidationError):
        classification_metrics([set()], [{OBL}])
    with pytest.raises(ValidationError):
        classification_metrics([{OBL}], [{NONE, OBL}])


def test_classification_perfect_and_disjoint():
    golds = [{OBL}, {ENT, PRO}]
    assert classification_metrics(golds, golds).macro_f1 == 1.0
    report = classification_metrics([{OBL}], [{ENT}])
    assert report.macro_f1 == 0.0
    assert report.accuracy == 0.0


# ---------------------------------------------------------------------------
# Entity extraction and repair


def oracle_entities(tags):
    """Independent reading: S-X is a singleton, B-X or orphan I-X starts
    a run extended by same-type I-X."""
    ents = []
    i = 0
    while i < len(tags):
        tag = tags[i]
        if tag == "O":
            i += 1
            continue
        prefix, suffix = tag.split("-", 1)
        if prefix == "S":
            ents.append((suffix, i, i))
            i += 1
            continue
        j = i + 1
        while j < len(tags) and tags[j] == f"I-{suffix}":
            j += 1
        ents.append((suffix, i, j - 1))
        i = j
    return ents


def random_tagseq(rng: random.Random, length: int):
    spans = []
    pos = 0
    while pos < length:
        if rng.random() < 0.35:
            end = min(length - 1, pos + rng.randint(0, 3))
            spans.append((rng.choice(SPAN_TYPES), pos, end))
            pos = end + 2
        else:
            pos += 1
    return spans_to_tags(spans, length)


def corrupt(tags, rng: random.Random):
    """Introduce ill-formed transitions to exercise the repair path."""
    out = list(tags)
    for i in range(len(out)):
        if rng.random() < 0.15:
            t = rng.choice(SPAN_TYPES)
            out[i] = rng.choice(["O", f"B-{t.tag_suffix}", f"I-{t.tag_suffix}",
                                 f"S-{t.tag_suffix}"])
    return out


def test_extract_entities_matches_oracle_on_corrupted_sequences():
    rng = random.Random(77)
    for _ in range(300):
        tags = corrupt(random_tagseq(rng, rng.randint(1, 25)), rng)
        got, _ = extract_entities(tags)
        want = [(s, a, b) for s, a, b in oracle_entities(tags)]
        assert [(t.tag_suffix, a, b) for t, a, b in got] == want


def test_extract_entities_repair_counting():
    ents, repairs = extract_entities(["O", "I-OBL", "I-OBL", "O"])
    assert ents == [(OBL, 1, 2)]
    assert repairs == 1
    ents, repairs = extract_entities(["B-OBL", "I-ENT"])
    assert ents == [(OBL, 0, 0), (ENT, 1, 1)]
    assert repairs == 1
    ents, repairs = extract_entities(["B-OBL", "I-OBL", "S-PRO"])
    assert ents == [(OBL, 0, 1), (PRO, 2, 2)]
    assert repairs == 0


def test_extract_entities_rejects_unknown_tags():
    with pytest.raises(ValidationError):
        extract_entities(["O", "B-XYZ"])


def test_erase_types_keeps_shape():
    tags = ["O", "B-OBL", "I-OBL", "S-PRO", "O"]
    assert erase_types(tags) == ["O", "B-SPAN", "I-SPAN", "S-SPAN", "O"]


# ---------------------------------------------------------------------------
# Span metrics


def test_span_metrics_type_confusion_hand_example():
    gold = [["B-OBL", "I-OBL", "O"]]
    pred = [["B-ENT", "I-ENT", "O"]]
    labeled = span_metrics(gold, pred, labeled=True)
    unlabeled = span_metrics(gold, pred, labeled=False)
    assert labeled.micro_f1 == 0.0
    assert unlabeled.micro_f1 == 1.0
    # token accuracy: raw tags differ on two tokens; erased tags agree
    assert close(labeled.accuracy, 1 / 3)
    assert unlabeled.accuracy == 1.0


def test_span_metrics_boundary_miss():
    gold = [["B-OBL", "I-OBL", "I-OBL", "O"]]
    pred = [["O", "B-OBL", "I-OBL", "O"]]
    labeled = span_metrics(gold, pred, labeled=True)
    # (1,2) vs gold (0,2): no credit in either mode
    assert labeled.micro_f1 == 0.0
    assert span_metrics(gold, pred, labeled=False).micro_f1 == 0.0


def test_span_metrics_against_set_oracle_random():
    rng = random.Random(4242)
    for _ in range(200):
        n = rng.randint(1, 12)
        gold, pred = [], []
        for _ in range(n):
            length = rng.randint(1, 20)
            gold.append(corrupt(random_tagseq(rng, length), rng))
            pred.append(corrupt(random_tagseq(rng, length), rng))
        report = span_metrics(gold, pred, labeled=True)
        gold_set, pred_set = set(), set()
        for i in range(n):
            gold_set |= {(i, s) for s in oracle_entities(gold[i])}
            pred_set |= {(i, s) for s in oracle_entities(pred[i])}
        tp = len(gold_set & pred_set)
        fp = len(pred_set - gold_set)
        fn = len(gold_set - pred_set)
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        f = 2 * p * r / (p + r) if p + r else 0.0
        assert close(report.micro_precision, p)
        assert close(report.micro_recall, r)
        assert close(report.micro_f1, f)


def test_unlabeled_micro_never_below_labeled_on_valid_sequences():
    rng = random.Random(991)
    for _ in range(500):
        n = rng.randint(1, 10)
        gold, pred = [], []
        for _ in range(n):
            length = rng.randint(1, 18)
            gold.append(random_tagseq(rng, length))
            pred.append(random_tagseq(rng, length))
        lab = span_metrics(gold, pred, labeled=True)
        unlab = span_metrics(gold, pred, labeled=False)
        assert unlab.micro_f1 >= lab.micro_f1 - 1e-12
        assert unlab.micro_precision >= lab.micro_precision - 1e-12
        assert unlab.micro_recall >= lab.micro_recall - 1e-12


def test_span_metrics_validates_lengths():
    with pytest.raises(UsageError):
        span_metrics([["O"]], [["O"], ["O"]])
    with pytest.raises(UsageError):
        span_metrics([["O", "O"]], [["O"]])


def test_span_metrics_macro_over_supported_types_only():
    gold = [["S-OBL", "O"]]
    pred = [["S-OBL", "S-PRO"]]
    report = span_metrics(gold, pred)
    assert set(report.included_classes) == {"Obl", "Pro"}
    # Obl perfect, Pro spurious: macro F1 = (1 + 0) / 2
    assert close(report.macro_f1, 0.5)
    wide = span_metrics(gold, pred, macro_over_all_types=True)
    assert len(wide.included_classes) == 6
    assert close(wide.macro_f1, 1 / 6)


def test_span_metrics_counts_repairs_from_both_sides():
    gold = [["O", "I-OBL"]]
    pred = [["I-ENT", "O"]]
    report = span_metrics(gold, pred)
    assert report.repairs == 2


# ---------------------------------------------------------------------------
# Red-flag harness


def test_redflag_hand_example():
    gold = [True, True, False, False, True]
    preds = [
        {"Tenant": {OBL}},                      # tp
        {"Tenant": {NONE}, "Landlord": {NONE}}, # fn (all None)
        {"Landlord": {PER}},                    # fp
        None,                                   # tn (no aliases)
        None,                                   # fn
    ]
    report = redflag_metrics(gold, preds)
    assert close(report.accuracy, 2 / 5)
    assert close(report.micro_precision, 1 / 2)
    assert close(report.micro_recall, 1 / 3)
    assert report.per_class["positive"].support == 3


def test_redflag_validates_lengths():
    with pytest.raises(UsageError):
        redflag_metrics([True], [None, None])
