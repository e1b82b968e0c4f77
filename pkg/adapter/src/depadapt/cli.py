"""Command-line entry point: parse-adapter."""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .adapter import SetupError, parse_sentences


def _atomic_write(path: Path, data: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(data, encoding="utf-8", newline="\n")
    os.replace(tmp, path)


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(
        prog="parse-adapter",
        description="Parse sentence records (line-delimited JSON) into "
        "CoNLL-U with completeness and entity sidecars.",
    )
    ap.add_argument("--in", dest="infile", required=True,
                    help="input sentences, one JSON object per line")
    ap.add_argument("--out-dir", required=True)
    ap.add_argument("--parser", default="heuristic",
                    help="backend: heuristic (default), spacy, or spacy:<model>")
    args = ap.parse_args(argv)

    src = Path(args.infile)
    if not src.exists():
        print(f"parse-adapter: input file not found: {src}", file=sys.stderr)
        return 1
    try:
        out = parse_sentences(
            src.read_text(encoding="utf-8").splitlines(), args.parser
        )
    except SetupError as exc:
        print(f"parse-adapter: {exc}", file=sys.stderr)
        return 3

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _atomic_write(out_dir / "parses.conllu", out.conllu)
    _atomic_write(
        out_dir / "completeness.json",
        json.dumps(
            {str(k): v for k, v in sorted(out.completeness.items())}, indent=2
        ) + "\n",
    )
    _atomic_write(
        out_dir / "entities.jsonl",
        "".join(json.dumps(e, sort_keys=True) + "\n" for e in out.entities),
    )
    _atomic_write(
        out_dir / "mentions.json", json.dumps(out.mentions, indent=2) + "\n"
    )
    _atomic_write(
        out_dir / "errors.jsonl",
        "".join(json.dumps(e, sort_keys=True) + "\n" for e in out.errors),
    )
    parsed = out.conllu.count("# sent_id = ")
    print(f"parsed {parsed} sentences, {len(out.errors)} errors")
    return 0


if __name__ == "__main__":
    sys.exit(main())
