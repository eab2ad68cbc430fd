"""Parser for the pattern query language.

Grammar (case- and whitespace-insensitive keywords, labels lowercased):

    query   = "MATCH" pattern "WITHIN" "WINDOW" "(" int "," int ")"
              "ACCURACY" "TOP-" int [bounds]
    pattern = "OBJECT" "(" label ")" | "CONJ" "(" label "," label ")"
    bounds  = ["EDGE_CPU_USAGE" number] ["EDGE_MEMORY_USAGE" number]

WINDOW(range, slide) is in seconds; range >= slide is required.
"""
from __future__ import annotations

import re
from typing import Optional, Sequence, Tuple

from .core import Query, WindowSpec
from .errors import BoundOutOfRange, QuerySyntaxError, UnknownLabel, UnsupportedPattern

#: Default label vocabulary (the 20 Pascal VOC classes).
VOC_LABELS = frozenset(
    {
        "aeroplane", "bicycle", "bird", "boat", "bottle", "bus", "car", "cat",
        "chair", "cow", "diningtable", "dog", "horse", "motorbike", "person",
        "pottedplant", "sheep", "sofa", "train", "tvmonitor",
    }
)

_TOKEN_RE = re.compile(
    r"""
    (?P<topk>TOP-\d+)
    | (?P<number>\d+(?:\.\d+)?)
    | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<punct>[(),])
    | (?P<space>\s+)
    | (?P<bad>.)
    """,
    re.VERBOSE | re.IGNORECASE,
)


def _tokenize(text: str):
    tokens = []  # (kind, value, offset)
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        if kind == "space":
            continue
        if kind == "bad":
            raise QuerySyntaxError(f"unexpected character {m.group()!r}", m.start())
        tokens.append((kind, m.group(), m.start()))
    return tokens


class _Cursor:
    def __init__(self, tokens, text_len: int):
        self.tokens = tokens
        self.pos = 0
        self.text_len = text_len

    def peek(self):
        if self.pos < len(self.tokens):
            return self.tokens[self.pos]
        return (None, "", self.text_len)

    def next(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def expect_word(self, keyword: str):
        kind, value, offset = self.next()
        if kind != "word" or value.upper() != keyword:
            raise QuerySyntaxError(f"expected {keyword}, got {value!r}", offset)

    def expect_punct(self, ch: str):
        kind, value, offset = self.next()
        if kind != "punct" or value != ch:
            raise QuerySyntaxError(f"expected {ch!r}, got {value!r}", offset)

    def expect_number(self) -> float:
        kind, value, offset = self.next()
        if kind != "number":
            raise QuerySyntaxError(f"expected a number, got {value!r}", offset)
        return float(value)

    def expect_label(self) -> str:
        kind, value, offset = self.next()
        if kind != "word":
            raise QuerySyntaxError(f"expected a label, got {value!r}", offset)
        return value.lower()

    def at_end(self) -> bool:
        return self.pos >= len(self.tokens)


def parse_query(text: str) -> Query:
    """Parse query text into a Query; raises typed errors, never crashes."""
    if not text or not text.strip():
        raise QuerySyntaxError("empty query", 0)
    cur = _Cursor(_tokenize(text), len(text))

    cur.expect_word("MATCH")
    kind, value, offset = cur.next()
    if kind != "word":
        raise QuerySyntaxError(f"expected a pattern, got {value!r}", offset)
    op = value.upper()
    if op == "OBJECT":
        cur.expect_punct("(")
        labels: Tuple[str, ...] = (cur.expect_label(),)
        cur.expect_punct(")")
    elif op == "CONJ":
        cur.expect_punct("(")
        a = cur.expect_label()
        cur.expect_punct(",")
        b = cur.expect_label()
        cur.expect_punct(")")
        labels = (a, b)
    else:
        raise UnsupportedPattern(f"unsupported pattern {value!r} at offset {offset}")

    cur.expect_word("WITHIN")
    cur.expect_word("WINDOW")
    cur.expect_punct("(")
    range_s = cur.expect_number()
    cur.expect_punct(",")
    slide_s = cur.expect_number()
    cur.expect_punct(")")
    window = WindowSpec(range_s=int(range_s), slide_s=int(slide_s))

    cur.expect_word("ACCURACY")
    kind, value, offset = cur.next()
    if kind != "topk":
        raise QuerySyntaxError(f"expected TOP-k, got {value!r}", offset)
    top_k = int(value.split("-")[1])

    cpu_bound: Optional[float] = None
    mem_bound: Optional[float] = None
    while not cur.at_end():
        kind, value, offset = cur.next()
        if kind != "word":
            raise QuerySyntaxError(f"unexpected token {value!r}", offset)
        word = value.upper()
        if word == "EDGE_CPU_USAGE":
            cpu_bound = cur.expect_number()
        elif word == "EDGE_MEMORY_USAGE":
            mem_bound = cur.expect_number()
        else:
            raise QuerySyntaxError(f"unexpected keyword {value!r}", offset)

    return Query(
        labels=labels,
        top_k=top_k,
        window=window,
        cpu_bound_pct=cpu_bound,
        mem_bound_pct=mem_bound,
    )


def render_query(q: Query) -> str:
    """Canonical text for a Query; reparses to an equal Query."""
    if q.is_conj:
        pattern = f"CONJ({q.labels[0]}, {q.labels[1]})"
    else:
        pattern = f"OBJECT({q.labels[0]})"
    parts = [
        f"MATCH {pattern}",
        f"WITHIN WINDOW({q.window.range_s}, {q.window.slide_s})",
        f"ACCURACY TOP-{q.top_k}",
    ]
    if q.cpu_bound_pct is not None:
        parts.append(f"EDGE_CPU_USAGE {q.cpu_bound_pct:g}")
    if q.mem_bound_pct is not None:
        parts.append(f"EDGE_MEMORY_USAGE {q.mem_bound_pct:g}")
    return " ".join(parts)


def validate_query(q: Query, vocabulary: Sequence[str] = VOC_LABELS) -> None:
    """Check labels against the vocabulary and bounds against (0, 100]."""
    vocab = set(vocabulary)
    for label in q.labels:
        if label not in vocab:
            raise UnknownLabel(f"label {label!r} not in vocabulary")
    for name, bound in (("cpu", q.cpu_bound_pct), ("memory", q.mem_bound_pct)):
        if bound is not None and not 0.0 < bound <= 100.0:
            raise BoundOutOfRange(f"{name} bound {bound} outside (0, 100]")
