"""Dependency-parse interchange: CoNLL-U reading/writing, token alignment,
sentence-completeness checks, and dependency-label normalization.

Only the ID, FORM, UPOS, HEAD and DEPREL columns are interpreted; the
rest round-trip as underscores. Heads are stored 0-based with the root
pointing at itself.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Mapping

from .errors import AlignmentError, ParseError, StructuralError

# UD-style subtype labels mapped onto the classic labels the rule engine
# expects. Applied only when normalize_labels() is called.
CLASSIC_LABEL_MAP: dict[str, str] = {
    "root": "ROOT",
    "nsubj:pass": "nsubjpass",
    "csubj:pass": "csubjpass",
    "aux:pass": "auxpass",
    "obl:agent": "agent",
    "obj": "dobj",
}

_MULTIWORD_ID = re.compile(r"^\d+-\d+$")
_EMPTY_NODE_ID = re.compile(r"^\d+\.\d+$")
_SENT_ID_COMMENT = re.compile(r"^#\s*sent_id\s*=\s*(.*)$")


@dataclass(frozen=True)
class Token:
    """One parsed token. ``head`` is a 0-based token index; the root
    token has ``head == index``."""

    index: int
    surface: str
    pos: str
    head: int
    deprel: str
    char_span: tuple[int, int] | None = None


@dataclass
class ParsedSentence:
    """A dependency tree for one sentence. Treat as immutable once built."""

    sentence_id: str
    tokens: list[Token]
    text: str | None = None
    complete: bool | None = None

    @cached_property
    def children(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {t.index: [] for t in self.tokens}
        for t in self.tokens:
            if t.head != t.index:
                out[t.head].append(t.index)
        return out

    @cached_property
    def root_index(self) -> int:
        for t in self.tokens:
            if t.head == t.index:
                return t.index
        raise StructuralError(f"sentence {self.sentence_id!r} has no root")

    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]


def _validate_tree(sent: ParsedSentence) -> None:
    n = len(sent.tokens)
    roots = [t for t in sent.tokens if t.head == t.index]
    if n == 0:
        raise StructuralError(f"sentence {sent.sentence_id!r} has no tokens")
    for t in sent.tokens:
        if not 0 <= t.head < n:
            raise StructuralError(
                f"sentence {sent.sentence_id!r}: head {t.head} of token "
                f"{t.index} out of range"
            )
    if len(roots) != 1:
        raise StructuralError(
            f"sentence {sent.sentence_id!r}: expected exactly one root, "
            f"found {len(roots)}"
        )
    # Every token must reach the root; otherwise there is a cycle.
    seen = {roots[0].index}
    stack = [roots[0].index]
    while stack:
        for child in sent.children[stack.pop()]:
            if child not in seen:
                seen.add(child)
                stack.append(child)
    if len(seen) != n:
        raise StructuralError(
            f"sentence {sent.sentence_id!r}: heads contain a cycle"
        )


def read_conllu(source: str | Iterable[str]) -> list[ParsedSentence]:
    """Parse CoNLL-U text (or an iterable of lines) into sentences.

    Multiword-token and empty-node lines are skipped. Each sentence is
    validated as a single-rooted tree.
    """
    if isinstance(source, str):
        lines = io.StringIO(source)
    else:
        lines = iter(source)

    sentences: list[ParsedSentence] = []
    pending_id: str | None = None
    pending_text: str | None = None
    rows: list[tuple[int, str, str, int, str]] = []
    lineno = 0

    def flush() -> None:
        nonlocal pending_id, pending_text, rows
        if not rows:
            pending_id = None
            pending_text = None
            return
        sid = pending_id if pending_id is not None else f"s{len(sentences) + 1}"
        tokens = []
        for cid, form, upos, head, deprel in rows:
            idx = cid - 1
            # HEAD 0 marks the root; store it as a self-loop.
            h = idx if head == 0 else head - 1
            tokens.append(Token(index=idx, surface=form, pos=upos, head=h, deprel=deprel))
        sent = ParsedSentence(sentence_id=sid, tokens=tokens, text=pending_text)
        _validate_tree(sent)
        sentences.append(sent)
        pending_id = None
        pending_text = None
        rows = []

    for raw in lines:
        lineno += 1
        line = raw.rstrip("\n")
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            m = _SENT_ID_COMMENT.match(line)
            if m:
                pending_id = m.group(1).strip()
            elif line.startswith("# text"):
                _, _, rest = line.partition("=")
                pending_text = rest.strip()
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ParseError(
                f"expected 10 tab-separated columns, got {len(cols)}", line=lineno
            )
        tid = cols[0]
        if _MULTIWORD_ID.match(tid) or _EMPTY_NODE_ID.match(tid):
            continue
        if not tid.isdigit():
            raise ParseError(f"bad token id {tid!r}", line=lineno)
        if not cols[6].isdigit():
            raise ParseError(f"bad head {cols[6]!r}", line=lineno)
        expected = (rows[-1][0] + 1) if rows else 1
        if int(tid) != expected:
            raise ParseError(
                f"token ids must be contiguous from 1; got {tid}", line=lineno
            )
        rows.append((int(tid), cols[1], cols[3], int(cols[6]), cols[7]))

    flush()
    return sentences


def write_conllu(sentences: Iterable[ParsedSentence]) -> str:
    """Serialize sentences back to CoNLL-U. Identity with read_conllu on
    the supported column subset."""
    blocks = []
    for sent in sentences:
        lines = [f"# sent_id = {sent.sentence_id}"]
        if sent.text is not None:
            lines.append(f"# text = {sent.text}")
        for t in sent.tokens:
            head = 0 if t.head == t.index else t.head + 1
            lines.append(
                "\t".join(
                    [
                        str(t.index + 1),
                        t.surface,
                        "_",
                        t.pos,
                        "_",
                        "_",
                        str(head),
                        t.deprel,
                        "_",
                        "_",
                    ]
                )
            )
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


def normalize_labels(
    sent: ParsedSentence, label_map: Mapping[str, str] | None = None
) -> ParsedSentence:
    """Return a copy with dependency labels rewritten through label_map
    (defaults to the UD-to-classic map)."""
    mapping = CLASSIC_LABEL_MAP if label_map is None else label_map
    tokens = [
        replace(t, deprel=mapping.get(t.deprel, t.deprel)) for t in sent.tokens
    ]
    out = ParsedSentence(
        sentence_id=sent.sentence_id,
        tokens=tokens,
        text=sent.text,
        complete=sent.complete,
    )
    return out


def align_tokens(sent: ParsedSentence, text: str) -> ParsedSentence:
    """Greedy left-to-right alignment of token surfaces onto ``text``.

    Whitespace in ``text`` is skipped between tokens. Raises
    AlignmentError with the first divergence offset on mismatch.
    """
    spans: list[tuple[int, int]] = []
    pos = 0
    for tok in sent.tokens:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        end = pos + len(tok.surface)
        if text[pos:end] != tok.surface:
            raise AlignmentError(
                f"token {tok.index} {tok.surface!r} does not match text",
                offset=pos,
            )
        spans.append((pos, end))
        pos = end
    rest = text[pos:]
    if rest.strip():
        raise AlignmentError("unconsumed text after last token", offset=pos)
    tokens = [replace(t, char_span=s) for t, s in zip(sent.tokens, spans)]
    out = ParsedSentence(
        sentence_id=sent.sentence_id,
        tokens=tokens,
        text=text,
        complete=sent.complete,
    )
    return out


def _tree_root_labels(tree: str) -> tuple[str, list[str]]:
    """Root label and immediate child labels of a bracketed tree."""
    s = tree.strip()
    if not s.startswith("(") or not s.endswith(")"):
        raise ParseError("bracketed tree must start with '(' and end with ')'")
    depth = 0
    root_label: list[str] = []
    child_labels: list[str] = []
    reading_root = True
    reading_child: list[str] | None = None
    for ch in s:
        if ch == "(":
            depth += 1
            if depth == 2:
                reading_child = []
            reading_root = depth == 1 and not root_label
            continue
        if ch == ")":
            depth -= 1
            if depth < 0:
                raise ParseError("unbalanced parentheses in bracketed tree")
            continue
        if depth == 1:
            if ch.isspace():
                reading_root = False
            elif reading_root or not root_label:
                root_label.append(ch)
                reading_root = True
        elif depth == 2 and reading_child is not None:
            if ch.isspace():
                if reading_child:
                    child_labels.append("".join(reading_child))
                    reading_child = None
            else:
                reading_child.append(ch)
    if depth != 0:
        raise ParseError("unbalanced parentheses in bracketed tree")
    return "".join(root_label), child_labels


def is_complete_sentence(parse: str | bool | None) -> bool:
    """Whether a constituency parse represents a complete sentence.

    Accepts a bracketed tree string (complete iff the root label is S,
    or the root is a ROOT/TOP wrapper with an S child), a boolean flag
    passed through as-is, or None (treated as incomplete).
    """
    if parse is None:
        return False
    if isinstance(parse, bool):
        return parse
    root, children = _tree_root_labels(parse)
    if root == "S":
        return True
    if root in ("ROOT", "TOP", ""):
        return "S" in children
    return False
