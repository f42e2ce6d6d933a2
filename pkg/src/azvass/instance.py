"""Line-oriented text formats: instance files, LBA descriptions and PCP tile sets.

Instance grammar (``#`` starts a comment)::

    vass d=<INT>
    state <ID>+
    trans <ID> -> <ID> [mat <matrix>] [vec <vector>]
    query reach|cover <ID> <vector> <ID> <vector>

with ``<matrix> ::= I | [ row (; row)* ]`` and ``<vector> ::= [ <INT>* ]``.
Omitted matrices are the identity and omitted vectors are zero.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .core import (AffineVass, Configuration, Query, Transition, VassError, identity,
                   is_identity, zero_vector)
from .gen.lba import Lba, Move
from .gen.pcp import PcpInstance

ID_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.@*']*\Z")
INT_RE = re.compile(r"[+-]?\d+\Z")
TOKEN_RE = re.compile(r"->|\[|\]|;|[^\s\[\];]+")


class ParseError(VassError):
    """Malformed input; ``line`` and ``col`` are 1-based."""

    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col
        self.message = message


@dataclass
class InstanceFile:
    system: AffineVass
    queries: list = field(default_factory=list)
    comments: tuple = ()


@dataclass(frozen=True)
class Token:
    text: str
    line: int
    col: int


def _tokens(line: str, lineno: int) -> list:
    body = line.split("#", 1)[0]
    return [Token(m.group(), lineno, m.start() + 1) for m in TOKEN_RE.finditer(body)]


class _Cursor:
    """Token stream of one line."""

    def __init__(self, toks: list, line: int, width: int):
        self.toks = toks
        self.i = 0
        self.line = line
        self.width = width

    def error(self, message: str, tok: Optional[Token] = None):
        if tok is None:
            tok = self.peek()
        col = tok.col if tok is not None else self.width + 1
        raise ParseError(self.line, col, message)

    def peek(self) -> Optional[Token]:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self, what: str) -> Token:
        tok = self.peek()
        if tok is None:
            self.error(f"expected {what}, found end of line")
        self.i += 1
        return tok

    def expect(self, text: str):
        tok = self.next(repr(text))
        if tok.text != text:
            self.error(f"expected {text!r}, found {tok.text!r}", tok)

    def ident(self) -> Token:
        tok = self.next("an identifier")
        if not ID_RE.match(tok.text):
            self.error(f"bad identifier {tok.text!r}", tok)
        return tok

    def integer(self) -> int:
        tok = self.next("an integer")
        if not INT_RE.match(tok.text):
            self.error(f"expected an integer, found {tok.text!r}", tok)
        return int(tok.text)

    def ints_until(self, stops) -> tuple:
        out = []
        while True:
            tok = self.peek()
            if tok is None or tok.text in stops:
                return tuple(out)
            out.append(self.integer())

    def vector(self, d: int) -> tuple:
        start = self.peek()
        self.expect("[")
        vals = self.ints_until({"]"})
        self.expect("]")
        if len(vals) != d:
            self.error(f"vector has {len(vals)} entries, expected {d}", start)
        return vals

    def matrix(self, d: int) -> tuple:
        tok = self.peek()
        if tok is not None and tok.text == "I":
            self.i += 1
            return identity(d)
        self.expect("[")
        rows = []
        while True:
            row_start = self.peek()
            row = self.ints_until({";", "]"})
            if len(row) != d:
                self.error(f"matrix row {len(rows) + 1} has {len(row)} entries, expected {d}",
                           row_start)
            rows.append(row)
            sep = self.next("';' or ']'")
            if sep.text == "]":
                break
        if len(rows) != d:
            self.error(f"matrix has {len(rows)} rows, expected {d}", tok)
        return tuple(rows)

    def done(self):
        tok = self.peek()
        if tok is not None:
            self.error(f"unexpected {tok.text!r}")


def _lines(text: str):
    for n, line in enumerate(text.splitlines(), start=1):
        toks = _tokens(line, n)
        if toks:
            yield _Cursor(toks, n, len(line))


def parse_instance(text: str) -> InstanceFile:
    d = None
    states, seen = [], {}
    trans, queries = [], []
    comments = tuple(line[1:].strip() for line in text.splitlines() if line.startswith("#"))
    for cur in _lines(text):
        head = cur.next("a keyword")
        key = head.text
        if d is None and key != "vass":
            cur.error("the first declaration must be 'vass d=<INT>'", head)
        if key == "vass":
            if d is not None:
                cur.error("dimension declared twice", head)
            tok = cur.next("'d=<INT>'")
            m = re.fullmatch(r"d=(\d+)", tok.text)
            if not m:
                cur.error(f"expected 'd=<INT>', found {tok.text!r}", tok)
            d = int(m.group(1))
            if d < 1:
                cur.error("dimension must be positive", tok)
        elif key == "state":
            if cur.peek() is None:
                cur.error("expected at least one state name")
            while cur.peek() is not None:
                tok = cur.ident()
                if tok.text in seen:
                    cur.error(f"state {tok.text!r} declared twice", tok)
                seen[tok.text] = tok
                states.append(tok.text)
        elif key == "trans":
            src = cur.ident()
            cur.expect("->")
            tgt = cur.ident()
            for tok in (src, tgt):
                if tok.text not in seen:
                    cur.error(f"undeclared state {tok.text!r}", tok)
            mat, vec = None, None
            while cur.peek() is not None:
                tok = cur.next("'mat' or 'vec'")
                if tok.text == "mat" and mat is None:
                    mat = cur.matrix(d)
                elif tok.text == "vec" and vec is None:
                    vec = cur.vector(d)
                else:
                    cur.error(f"unexpected {tok.text!r}", tok)
            trans.append(Transition(src.text, tgt.text, mat if mat is not None else identity(d),
                                    vec if vec is not None else zero_vector(d)))
        elif key == "query":
            kind = cur.next("'reach' or 'cover'")
            if kind.text not in ("reach", "cover"):
                cur.error(f"unknown query kind {kind.text!r}", kind)
            confs = []
            for _ in range(2):
                tok = cur.ident()
                if tok.text not in seen:
                    cur.error(f"undeclared state {tok.text!r}", tok)
                confs.append(Configuration(tok.text, cur.vector(d)))
            cur.done()
            queries.append(Query(kind.text, confs[0], confs[1]))
        else:
            cur.error(f"unknown keyword {key!r}", head)
    if d is None:
        raise ParseError(1, 1, "missing 'vass d=<INT>' declaration")
    if not states:
        raise ParseError(1, 1, "no states declared")
    return InstanceFile(AffineVass(d, tuple(states), tuple(trans)), queries, comments)


def format_vector(v: Sequence[int]) -> str:
    return "[" + " ".join(str(x) for x in v) + "]"


def format_matrix(a) -> str:
    if is_identity(a):
        return "I"
    return "[" + "; ".join(" ".join(str(x) for x in row) for row in a) + "]"


def serialize_instance(inst: InstanceFile, notes: Optional[Sequence[str]] = None) -> str:
    """Text form; ``notes[i]`` (when given) becomes a trailing comment on transition ``i``."""
    vass = inst.system
    out = [f"# {c}" if c else "#" for c in inst.comments]
    out.append(f"vass d={vass.d}")
    out.append("state " + " ".join(vass.states))
    for i, t in enumerate(vass.transitions):
        line = f"trans {t.src} -> {t.tgt}"
        if not is_identity(t.mat):
            line += f" mat {format_matrix(t.mat)}"
        if any(t.vec):
            line += f" vec {format_vector(t.vec)}"
        if notes is not None and notes[i]:
            line += f"  # {notes[i]}"
        out.append(line)
    for q in inst.queries:
        out.append(f"query {q.kind} {q.source.state} {format_vector(q.source.values)} "
                   f"{q.target.state} {format_vector(q.target.values)}")
    return "\n".join(out) + "\n"


def serialize_reduced(red, u=None, v=None, comments: Sequence[str] = ()) -> str:
    """A reduced system as an instance file, each transition tagged with its stage."""
    queries = []
    if u is not None and v is not None:
        queries.append(Query("reach", red.start_config(u), red.end_config(v)))
    notes = []
    for i, stage in enumerate(red.stages):
        tag = stage.value
        if red.origin[i] is not None:
            tag += f" of source transition {red.origin[i]}"
        notes.append(tag)
    head = list(comments) + [f"reduced system, dimension {red.inner.d}, "
                             f"monoid size {len(red.monoid)}"]
    return serialize_instance(InstanceFile(red.inner, queries, tuple(head)), notes)


# ---------------------------------------------------------------------------
# LBA descriptions


@dataclass
class LbaFile:
    lba: Lba
    words: list


def _letters(cur: _Cursor) -> tuple:
    toks = []
    while cur.peek() is not None:
        toks.append(cur.next("letters").text)
    letters = tuple("".join(toks))
    if not letters:
        cur.error("expected at least one letter")
    if len(set(letters)) != len(letters):
        cur.error("repeated letter")
    return letters


def parse_lba(text: str) -> LbaFile:
    """``lba``, ``tape``, ``input``, ``initial/accept/reject``, ``delta`` and ``word`` lines.

    ``delta p a -> q b L|R``; a second move for the same ``(p, a)`` is an
    error since only deterministic machines are accepted.
    """
    header = False
    tape = inp = None
    marks = {}
    delta, where = {}, {}
    states = []
    words = []

    def note(name):
        if name not in states:
            states.append(name)

    for cur in _lines(text):
        head = cur.next("a keyword")
        key = head.text
        if not header:
            if key != "lba":
                cur.error("the first line must be 'lba'", head)
            header = True
            cur.done()
            continue
        if key == "tape":
            tape = _letters(cur)
        elif key == "input":
            inp = _letters(cur)
        elif key in ("initial", "accept", "reject"):
            if key in marks:
                cur.error(f"'{key}' given twice", head)
            marks[key] = cur.ident().text
            note(marks[key])
            cur.done()
        elif key == "delta":
            p = cur.ident()
            a = cur.next("a letter")
            cur.expect("->")
            q = cur.ident()
            b = cur.next("a letter")
            mv = cur.next("'L' or 'R'")
            cur.done()
            for tok in (a, b):
                if len(tok.text) != 1:
                    cur.error(f"expected a single letter, found {tok.text!r}", tok)
            if mv.text not in ("L", "R"):
                cur.error(f"expected 'L' or 'R', found {mv.text!r}", mv)
            key2 = (p.text, a.text)
            if key2 in delta:
                cur.error(f"nondeterministic: second move for ({p.text}, {a.text}); "
                          f"first given on line {where[key2]}", head)
            delta[key2] = (q.text, b.text, Move(mv.text))
            where[key2] = cur.line
            note(p.text)
            note(q.text)
        elif key == "word":
            tok = cur.next("a word")
            cur.done()
            words.append(tok.text)
        else:
            cur.error(f"unknown keyword {key!r}", head)
    if not header:
        raise ParseError(1, 1, "missing 'lba' header")
    for key in ("initial", "accept", "reject"):
        if key not in marks:
            raise ParseError(1, 1, f"missing '{key}' line")
    if tape is None:
        raise ParseError(1, 1, "missing 'tape' line")
    if inp is None:
        inp = tape
    try:
        lba = Lba(tuple(states), inp, tape, delta, marks["initial"], marks["accept"],
                  marks["reject"])
        for w in words:
            lba.check_word(w)
    except VassError as exc:
        raise ParseError(1, 1, str(exc)) from exc
    return LbaFile(lba, words)


def serialize_lba(lf: LbaFile) -> str:
    lba = lf.lba
    out = ["lba", "tape " + "".join(lba.tape_alphabet), "input " + "".join(lba.input_alphabet),
           f"initial {lba.initial}", f"accept {lba.accept}", f"reject {lba.reject}"]
    for (p, a), (q, b, mv) in lba.delta.items():
        out.append(f"delta {p} {a} -> {q} {b} {mv.value}")
    out.extend(f"word {w}" for w in lf.words)
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# PCP tile sets


def parse_pcp(text: str) -> PcpInstance:
    header = False
    tiles = []
    for cur in _lines(text):
        head = cur.next("a keyword")
        if not header:
            if head.text != "pcp":
                cur.error("the first line must be 'pcp'", head)
            header = True
            cur.done()
            continue
        if head.text != "tile":
            cur.error(f"unknown keyword {head.text!r}", head)
        pair = []
        for _ in range(2):
            tok = cur.next("a bit string")
            if not re.fullmatch(r"[01]+", tok.text):
                cur.error(f"expected a nonempty bit string, found {tok.text!r}", tok)
            pair.append(tok.text)
        cur.done()
        tiles.append(tuple(pair))
    if not header:
        raise ParseError(1, 1, "missing 'pcp' header")
    if not tiles:
        raise ParseError(1, 1, "no tiles given")
    return PcpInstance(tuple(tiles))


def serialize_pcp(inst: PcpInstance) -> str:
    return "pcp\n" + "".join(f"tile {a} {b}\n" for a, b in inst.tiles)
