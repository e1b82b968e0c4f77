"""Command-line entry points.

Every run writes its artifacts plus a manifest.json recording the
effective configuration, input and artifact digests, the lexicon
fingerprint and resolution policy where relevant, and a digest of the
manifest body itself. Nothing time-dependent goes into artifacts, so
reruns on identical inputs are byte-identical.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path
from typing import Collection, Mapping, Sequence

from . import __version__
from .corpus import (
    AnnotationRecord,
    ReliabilityData,
    compute_stats,
    export_conditioned,
    krippendorff_alpha_nominal,
    merge_majority,
    read_records,
    stats_tables,
    token_alpha,
    write_records,
)
from .defaults import DEFAULT_ALIAS_GROUPS, group_of
from .errors import DeomodError, InputMissingError, UsageError
from .evaluation import (
    classification_metrics,
    redflag_metrics,
    span_metrics,
)
from .ingest import (
    definition_discards,
    detect_contract_type,
    extract_aliases,
    extract_provisions,
    filter_definitions,
    merge_bullets,
    segment_sentences,
)
from .lingrep import (
    CLASSIC_LABEL_MAP,
    normalize_labels,
    read_conllu,
    write_conllu,
)
from .rules import (
    POLICY_ID,
    DeonticType,
    apply_dependency_rules,
    load_default_lexicon,
    load_lexicon,
    majority_class_baseline,
    majority_span_baseline,
    parse_type,
    spans_to_tags,
    tags_to_spans,
    to_multilabel,
)

# ---------------------------------------------------------------------------
# Small IO helpers


def _sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _sha256_file(path: Path) -> str:
    return _sha256_bytes(path.read_bytes())


def _canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def _pretty_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=2) + "\n"


def _jsonl(rows: Sequence[Mapping]) -> str:
    return "".join(
        json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n" for row in rows
    )


def _read_text(path: str) -> str:
    p = Path(path)
    if not p.exists():
        raise InputMissingError(f"input file not found: {path}")
    return p.read_text(encoding="utf-8")


def _read_json(path: str):
    return json.loads(_read_text(path))


def _read_record_file(path: str, field_map=None) -> list[AnnotationRecord]:
    return read_records(_read_text(path).splitlines(), field_map)


def _read_pred_file(path: str) -> list[AnnotationRecord]:
    """Prediction rows pair on (sentence_id, agent); contract_id is
    corpus provenance and may be absent, e.g. in extract output."""
    lines = []
    for line in _read_text(path).splitlines():
        if line.strip():
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                pass  # read_records reports it with the line number
            else:
                if isinstance(obj, dict):
                    obj.setdefault("contract_id", "")
                    line = json.dumps(obj)
        lines.append(line)
    return read_records(lines)


def _load_alias_groups(path: str | None) -> dict[str, str]:
    if path is None:
        return dict(DEFAULT_ALIAS_GROUPS)
    obj = _read_json(path)
    if not isinstance(obj, dict):
        raise UsageError("alias-groups file must be a JSON object")
    return {str(k): str(v) for k, v in obj.items()}


# Options whose values are filesystem paths. The manifest records their
# basenames only; content identity lives in the input digests. Keeping
# locations out of the config makes reruns from any directory comparable.
_PATH_OPTIONS = frozenset(
    {
        "html",
        "completeness",
        "mentions",
        "alias_groups",
        "conllu",
        "aliases",
        "lexicon",
        "train",
        "records",
        "gold",
        "pred",
    }
)


class _Run:
    """Collects inputs and artifacts for one command invocation and
    writes the manifest at the end."""

    def __init__(self, command: str, args: argparse.Namespace):
        self.command = command
        self.out_dir = Path(args.out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        config = {}
        for k, v in sorted(vars(args).items()):
            if k in ("func", "out_dir", "config") or k.startswith("_"):
                continue
            if k in _PATH_OPTIONS and isinstance(v, str):
                v = Path(v).name
            config[k] = v
        self.config = config
        self.inputs: dict[str, str] = {}
        self.artifacts: dict[str, str] = {}
        self.seed = getattr(args, "seed", 0) or 0
        self.lexicon_hash: str | None = None

    def add_input(self, path: str | None):
        if path is None:
            return
        p = Path(path)
        if p.exists() and p.is_file():
            self.inputs[p.name] = _sha256_file(p)

    def write(self, name: str, text: str) -> Path:
        path = self.out_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="\n")
        rel = path.relative_to(self.out_dir).as_posix()
        self.artifacts[rel] = _sha256_bytes(text.encode("utf-8"))
        return path

    def finish(self):
        body = {
            "command": self.command,
            "config": {k: v for k, v in self.config.items()},
            "config_hash": _sha256_bytes(_canonical_json(self.config).encode()),
            "seed": self.seed,
            "policy_id": POLICY_ID,
            "lexicon_hash": self.lexicon_hash,
            "inputs": self.inputs,
            "artifacts": self.artifacts,
        }
        body["manifest_hash"] = _sha256_bytes(_canonical_json(body).encode())
        (self.out_dir / "manifest.json").write_text(
            _pretty_json(body), encoding="utf-8", newline="\n"
        )


# ---------------------------------------------------------------------------
# Commands


def _completeness_from_file(path: str):
    table = {int(k): bool(v) for k, v in _read_json(path).items()}
    return lambda prov: table.get(prov.index)


def cmd_ingest(args) -> int:
    run = _Run("ingest", args)
    run.add_input(args.html)
    run.add_input(args.completeness)
    provisions = extract_provisions(_read_text(args.html), args.contract_id)
    discards = definition_discards(provisions)
    if not args.keep_definitions:
        provisions = filter_definitions(provisions)
    if args.completeness:
        provisions = merge_bullets(
            provisions, _completeness_from_file(args.completeness)
        )
    sentences = []
    for p in provisions:
        sentences.extend(segment_sentences(p))
    run.write("provisions.jsonl", _jsonl([p.to_dict() for p in provisions]))
    run.write(
        "definition_discards.jsonl",
        _jsonl([{"cue": cue, **p.to_dict()} for p, cue in discards]),
    )
    run.write("sentences.jsonl", _jsonl([s.to_dict() for s in sentences]))
    run.finish()
    return 0


def cmd_aliases(args) -> int:
    run = _Run("aliases", args)
    run.add_input(args.html)
    run.add_input(args.mentions)
    run.add_input(args.alias_groups)
    provisions = extract_provisions(_read_text(args.html), args.contract_id)
    mentions = None
    if args.mentions:
        mentions = [str(m) for m in _read_json(args.mentions)]
    groups = _load_alias_groups(args.alias_groups)
    aliases = extract_aliases(
        provisions,
        entity_mentions=mentions,
        threshold=args.threshold,
        alias_groups=groups,
    )
    warnings = []
    if not aliases:
        warnings.append("no aliases met the frequency threshold")
    run.write(
        "aliases.json",
        _pretty_json(
            {"aliases": [a.to_dict() for a in aliases], "warnings": warnings}
        ),
    )
    run.finish()
    return 0


def cmd_contract_type(args) -> int:
    run = _Run("contract-type", args)
    run.add_input(args.html)
    provisions = extract_provisions(_read_text(args.html), args.contract_id)
    run.write(
        "contract_type.json",
        _pretty_json({"contract_type": detect_contract_type(provisions)}),
    )
    run.finish()
    return 0


def cmd_parse_import(args) -> int:
    run = _Run("parse-import", args)
    run.add_input(args.conllu)
    sentences = read_conllu(_read_text(args.conllu))
    if args.normalize:
        sentences = [normalize_labels(s, CLASSIC_LABEL_MAP) for s in sentences]
    run.write("parses.conllu", write_conllu(sentences))
    run.write(
        "report.json",
        _pretty_json(
            {"sentences": len(sentences), "normalized": bool(args.normalize)}
        ),
    )
    run.finish()
    return 0


def _alias_token_run(surfaces: Sequence[str], alias: str) -> bool:
    want = [w.lower() for w in alias.split()]
    low = [s.lower() for s in surfaces]
    n = len(want)
    return any(low[i : i + n] == want for i in range(len(low) - n + 1))


def cmd_extract(args) -> int:
    run = _Run("extract", args)
    run.add_input(args.conllu)
    run.add_input(args.aliases)
    run.add_input(args.lexicon)
    lexicon = (
        load_lexicon(args.lexicon) if args.lexicon else load_default_lexicon()
    )
    run.lexicon_hash = lexicon.fingerprint()
    alias_obj = _read_json(args.aliases)
    alias_list = [a["alias"] for a in alias_obj.get("aliases", [])]
    if not alias_list:
        raise UsageError("alias file contains no aliases")
    sentences = read_conllu(_read_text(args.conllu))
    rows = []
    for sent in sentences:
        extractions = apply_dependency_rules(
            sent, alias_list, lexicon, policy=args.policy
        )
        surfaces = sent.surfaces()
        for alias in alias_list:
            if not _alias_token_run(surfaces, alias):
                continue
            mine = [e for e in extractions if e.agent == alias]
            labels = to_multilabel(mine, alias)
            spans = sorted(
                {
                    (e.deontic_type, e.start_index,
                     e.start_index + len(e.trigger.split()) - 1)
                    for e in mine
                }
            )
            tags = spans_to_tags(spans, len(surfaces))
            rows.append(
                {
                    "sentence_id": sent.sentence_id,
                    "agent": alias,
                    "labels": sorted(t.value for t in labels),
                    "spans": [
                        {"type": t.value, "start": s, "end": e}
                        for t, s, e in spans
                    ],
                    "tags": tags,
                    "tokens": surfaces,
                    "extractions": [e.to_dict() for e in mine],
                }
            )
    run.write("extractions.jsonl", _jsonl(rows))
    run.finish()
    return 0


def _presence_counts(
    records: Sequence[AnnotationRecord], groups: Mapping[str, str]
) -> dict[str, dict[DeonticType, int]]:
    counts: dict[str, dict[DeonticType, int]] = {}
    for r in records:
        g = group_of(r.agent, groups)
        bucket = counts.setdefault(g, {})
        for t in r.labels:
            bucket[t] = bucket.get(t, 0) + 1
    return counts


def cmd_baseline(args) -> int:
    run = _Run("baseline", args)
    run.add_input(args.train)
    run.add_input(args.records)
    run.add_input(args.alias_groups)
    groups = _load_alias_groups(args.alias_groups)
    train = _read_record_file(args.train)
    records = _read_record_file(args.records)
    counts = _presence_counts(train, groups)
    majority = majority_class_baseline(
        counts, include_none=(args.mode == "majority-cls")
    )
    rows = []
    for r in records:
        g = group_of(r.agent, groups)
        if g not in majority:
            raise UsageError(f"agent group {g!r} unseen in training data")
        label = majority[g]
        row = {
            "sentence_id": r.sentence_id,
            "contract_id": r.contract_id,
            "agent": r.agent,
        }
        if args.mode == "majority-cls":
            row["labels"] = [label.value]
            row["spans"] = []
        else:
            if r.tokens is None:
                raise UsageError(
                    f"record {r.sentence_id}/{r.agent} has no tokens; the "
                    "span baseline needs them"
                )
            tags = majority_span_baseline(r.tokens, label)
            spans = tags_to_spans(tags)
            row["labels"] = sorted({t.value for t, _, _ in spans}) or ["None"]
            row["spans"] = [
                {"type": t.value, "start": s, "end": e} for t, s, e in spans
            ]
            row["tokens"] = list(r.tokens)
        rows.append(row)
    run.write("predictions.jsonl", _jsonl(rows))
    run.finish()
    return 0


def cmd_merge_annotations(args) -> int:
    run = _Run("merge-annotations", args)
    run.add_input(args.records)
    records = _read_record_file(args.records)
    by_key: dict[tuple[str, str], list[AnnotationRecord]] = {}
    order: list[tuple[str, str]] = []
    for r in records:
        key = (r.sentence_id, r.agent)
        if key not in by_key:
            by_key[key] = []
            order.append(key)
        by_key[key].append(r)
    merged, discarded, flagged = [], [], 0
    for key in order:
        result = merge_majority(by_key[key])
        if result.record is None:
            discarded.append({"sentence_id": key[0], "agent": key[1]})
        else:
            merged.append(result.record)
            if result.union_merged:
                flagged += 1
    run.write("merged.jsonl", write_records(merged))
    run.write("discarded.jsonl", _jsonl(discarded))
    run.write(
        "report.json",
        _pretty_json(
            {
                "pairs": len(order),
                "merged": len(merged),
                "discarded": len(discarded),
                "union_flagged": flagged,
            }
        ),
    )
    run.finish()
    return 0


def _label_value(record: AnnotationRecord) -> str:
    return "|".join(sorted(t.value for t in record.labels))


def cmd_agreement(args) -> int:
    run = _Run("agreement", args)
    run.add_input(args.records)
    records = _read_record_file(args.records)
    annotators = sorted({r.annotator_id for r in records if r.annotator_id})
    if len(annotators) < 2:
        raise UsageError("agreement needs records from at least two annotators")
    by_key: dict[tuple[str, str], dict[str, AnnotationRecord]] = {}
    order: list[tuple[str, str]] = []
    for r in records:
        key = (r.sentence_id, r.agent)
        if key not in by_key:
            by_key[key] = {}
            order.append(key)
        by_key[key][r.annotator_id] = r

    matrix: list[list] = []
    if args.mode == "labels":
        for key in order:
            row = [
                _label_value(by_key[key][a]) if a in by_key[key] else None
                for a in annotators
            ]
            matrix.append(row)
    else:
        for key in order:
            cell = by_key[key]
            present = [cell[a] for a in annotators if a in cell]
            tokens = next((r.tokens for r in present if r.tokens), None)
            if tokens is None:
                raise UsageError(
                    f"record {key[0]}/{key[1]} has no tokens; token-level "
                    "agreement needs them"
                )
            threshold = len(present) // 2 + 1
            votes: dict[DeonticType, int] = {}
            for r in present:
                for t in r.labels:
                    votes[t] = votes.get(t, 0) + 1
            majority_types = {t for t, v in votes.items() if v >= threshold}
            span_sets = [
                list(cell[a].spans) if a in cell else None for a in annotators
            ]
            data = token_alpha(span_sets, len(tokens), majority_types)
            matrix.extend(data.matrix)
    alpha = krippendorff_alpha_nominal(ReliabilityData(matrix))
    run.write(
        "agreement.json",
        _pretty_json(
            {
                "mode": args.mode,
                "alpha": alpha,
                "items": len(matrix),
                "annotators": len(annotators),
            }
        ),
    )
    run.finish()
    return 0


def cmd_stats(args) -> int:
    run = _Run("stats", args)
    run.add_input(args.records)
    run.add_input(args.alias_groups)
    groups = _load_alias_groups(args.alias_groups)
    records = _read_record_file(args.records)
    stats = compute_stats(records, alias_groups=groups, top_k=args.top_k)
    run.write("stats.json", _pretty_json(stats))
    for name, csv_text in stats_tables(stats).items():
        run.write(f"tables/{name}.csv", csv_text)
    run.finish()
    return 0


def cmd_export(args) -> int:
    run = _Run("export", args)
    run.add_input(args.records)
    run.add_input(args.alias_groups)
    groups = _load_alias_groups(args.alias_groups)
    records = _read_record_file(args.records)
    rows = export_conditioned(
        records, mode=args.mode, alias_groups=groups, seed=args.seed
    )
    run.write("conditioned.jsonl", _jsonl(rows))
    run.finish()
    return 0


def _summary_csv(report) -> str:
    row = report.summary_row()
    header = ",".join(row)
    values = ",".join(f"{v:.2f}" for v in row.values())
    return f"{header}\n{values}\n"


def _paired_records(
    gold: Sequence[AnnotationRecord], pred: Sequence[AnnotationRecord]
) -> list[tuple[AnnotationRecord, AnnotationRecord]]:
    pred_by_key = {(r.sentence_id, r.agent): r for r in pred}
    pairs = []
    missing = []
    for g in gold:
        key = (g.sentence_id, g.agent)
        p = pred_by_key.get(key)
        if p is None:
            missing.append(key)
        else:
            pairs.append((g, p))
    if missing:
        raise UsageError(
            f"{len(missing)} gold records lack predictions, first: "
            f"{missing[0][0]}/{missing[0][1]}"
        )
    return pairs


def cmd_evaluate(args) -> int:
    run = _Run("evaluate", args)
    run.add_input(args.gold)
    run.add_input(args.pred)
    gold = _read_record_file(args.gold)
    pred = _read_pred_file(args.pred)
    pairs = _paired_records(gold, pred)
    if args.task == "cls":
        report = classification_metrics(
            [g.labels for g, _ in pairs],
            [p.labels for _, p in pairs],
            macro_over_all_classes=args.macro_all,
        )
    else:
        gold_tags, pred_tags = [], []
        for g, p in pairs:
            if g.tokens is None:
                raise UsageError(
                    f"gold record {g.sentence_id}/{g.agent} has no tokens"
                )
            length = len(g.tokens)
            gold_tags.append(spans_to_tags(g.spans, length))
            pred_tags.append(spans_to_tags(p.spans, length))
        report = span_metrics(
            gold_tags,
            pred_tags,
            labeled=not args.unlabeled,
            macro_over_all_types=args.macro_all,
        )
    run.write("metrics.json", _pretty_json(report.to_dict()))
    run.write("summary.csv", _summary_csv(report))
    run.finish()
    return 0


def cmd_redflag_eval(args) -> int:
    run = _Run("redflag-eval", args)
    run.add_input(args.gold)
    run.add_input(args.pred)
    gold_rows = _read_json(args.gold)
    by_sentence: dict[str, dict[str, set]] = {}
    for line in _read_text(args.pred).splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        bucket = by_sentence.setdefault(str(obj["sentence_id"]), {})
        bucket[str(obj["agent"])] = {parse_type(v) for v in obj["labels"]}
    gold_flags, preds = [], []
    for row in gold_rows:
        gold_flags.append(bool(row["positive"]))
        preds.append(by_sentence.get(str(row["sentence_id"])))
    report = redflag_metrics(gold_flags, preds)
    run.write("metrics.json", _pretty_json(report.to_dict()))
    run.write("summary.csv", _summary_csv(report))
    run.finish()
    return 0


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deomod",
        description="Deontic modality extraction and evaluation for contracts.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "--config",
        default=None,
        help="JSON file of option defaults; explicit flags override it",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.add_argument("--out-dir", required=True)
        p.set_defaults(func=func)
        return p

    p = add("ingest", cmd_ingest, help="HTML to provisions and sentences")
    p.add_argument("--html", required=True)
    p.add_argument("--contract-id", required=True)
    p.add_argument("--completeness", default=None,
                   help="JSON map of provision index to completeness")
    p.add_argument("--keep-definitions", action="store_true")

    p = add("aliases", cmd_aliases, help="discover contracting-party aliases")
    p.add_argument("--html", required=True)
    p.add_argument("--contract-id", required=True)
    p.add_argument("--mentions", default=None,
                   help="JSON list of entity mention strings")
    p.add_argument("--threshold", type=int, default=2)
    p.add_argument("--alias-groups", default=None)

    p = add("contract-type", cmd_contract_type, help="detect the contract type")
    p.add_argument("--html", required=True)
    p.add_argument("--contract-id", required=True)

    p = add("parse-import", cmd_parse_import, help="validate dependency parses")
    p.add_argument("--conllu", required=True)
    p.add_argument("--normalize", action="store_true",
                   help="map enhanced relation names onto classic ones")

    p = add("extract", cmd_extract, help="run the dependency rules")
    p.add_argument("--conllu", required=True)
    p.add_argument("--aliases", required=True)
    p.add_argument("--lexicon", default=None)
    p.add_argument("--policy", default=POLICY_ID)

    p = add("baseline", cmd_baseline, help="majority baselines")
    p.add_argument("--mode", choices=("majority-cls", "majority-span"),
                   required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--records", required=True)
    p.add_argument("--alias-groups", default=None)

    p = add("merge-annotations", cmd_merge_annotations,
            help="majority-vote merge of annotator records")
    p.add_argument("--records", required=True)

    p = add("agreement", cmd_agreement, help="inter-annotator agreement")
    p.add_argument("--records", required=True)
    p.add_argument("--mode", choices=("labels", "tokens"), default="labels")

    p = add("stats", cmd_stats, help="corpus statistics")
    p.add_argument("--records", required=True)
    p.add_argument("--alias-groups", default=None)
    p.add_argument("--top-k", type=int, default=10)

    p = add("export", cmd_export, help="agent-conditioned model inputs")
    p.add_argument("--records", required=True)
    p.add_argument("--mode", required=True,
                   choices=("agent-token", "anonymize-consistent",
                            "anonymize-random"))
    p.add_argument("--alias-groups", default=None)
    p.add_argument("--seed", type=int, default=0)

    p = add("evaluate", cmd_evaluate, help="score predictions against gold")
    p.add_argument("--task", choices=("cls", "span"), required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--unlabeled", action="store_true",
                   help="span task: ignore types when matching")
    p.add_argument("--macro-all", action="store_true",
                   help="macro-average over every class, supported or not")

    p = add("redflag-eval", cmd_redflag_eval,
            help="sentence-level obligation detection harness")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)

    return parser


def _apply_config_defaults(parser: argparse.ArgumentParser, defaults: dict):
    """Seed every subcommand with values from a config file.

    Config keys use the option spelling (dashes allowed). A key that
    matches a required option also lifts the requirement, since the
    value is now supplied; explicit flags still take precedence because
    argparse only falls back to defaults for absent options.
    """
    values = {k.replace("-", "_"): v for k, v in defaults.items()}
    stack = [parser]
    while stack:
        current = stack.pop()
        known = {a.dest for a in current._actions}
        current.set_defaults(**{k: v for k, v in values.items() if k in known})
        for action in current._actions:
            choices = getattr(action, "choices", None)
            if isinstance(choices, dict):
                stack.extend(
                    p for p in choices.values()
                    if isinstance(p, argparse.ArgumentParser)
                )
            elif action.dest in values and action.required:
                action.required = False


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    # Two-phase parse so --config supplies defaults that flags override.
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config", default=None)
    known, _ = probe.parse_known_args(argv)
    if known.config:
        defaults = _read_json(known.config)
        if not isinstance(defaults, dict):
            raise UsageError("config file must hold a JSON object")
        _apply_config_defaults(parser, defaults)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, InputMissingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DeomodError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
