"""Parsing of shape expressions and noisy matching of signals against them.

A signal matches when it can be cut into consecutive segments (neighbours
share one boundary sample) that spell a word of the shape regex, where each
segment's duration lies in its atom's ``d`` interval and some line with
``(a, b)`` inside the atom's box fits it with MSE at most ``nu``.  Segment
parameters are chosen independently per segment.

The search is a reachability DP over (sample index, Glushkov position).
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from shapemine import kernels
from shapemine.regexgen import (
    EMPTY, EPS, Atom, Concat, Epsilon, Lse, Regex, Star, Symbol, Union,
)
from shapemine.signal import Signal


class LseSyntaxError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.column = col


class LseSemanticError(ValueError):
    pass


# -- parser --------------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[().+*:\[\],])
""", re.VERBOSE)
_NUMBER = re.compile(r"[-+]?(?:inf|(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if tokens and tokens[-1][1] in ("[", ","):
            ws = re.compile(r"\s*").match(text, pos)
            m = _NUMBER.match(text, ws.end())
            if m:
                tokens.append(("num", m.group(), m.start()))
                pos = m.end()
                continue
        m = _TOKEN.match(text, pos)
        if not m:
            raise LseSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.k = 0
        self.atoms: dict[str, Atom] = {}

    @property
    def tok(self):
        return self.tokens[self.k]

    def error(self, message):
        raise LseSyntaxError(message, self.text, self.tok[2])

    def expect(self, value: str):
        if self.tok[1] != value:
            found = self.tok[1] or "end of input"
            self.error(f"expected {value!r}, found {found!r}")
        self.k += 1

    def ident(self) -> str:
        if self.tok[0] != "ident":
            self.error(f"expected a parameter name, found {self.tok[1]!r}")
        name = self.tok[1]
        self.k += 1
        return name

    def parse(self) -> Lse:
        shape = self.union()
        constraints: dict[str, tuple[float, float]] = {}
        if self.tok[1] == ":":
            self.k += 1
            self.constraint(constraints)
            while self.tok[1] == "and":
                self.k += 1
                self.constraint(constraints)
        if self.tok[0] != "eof":
            self.error(f"unexpected {self.tok[1]!r}")
        params = {p for atom in self.atoms.values() for p in atom.params}
        for p in constraints:
            if p not in params:
                raise LseSemanticError(f"constraint on unknown parameter {p!r}")
        return Lse(shape, dict(sorted(self.atoms.items())), constraints)

    def union(self) -> Regex:
        r = self.concat()
        while self.tok[1] == "+":
            self.k += 1
            r = Union(r, self.concat())
        return r

    def concat(self) -> Regex:
        r = self.postfix()
        while self.tok[1] == ".":
            self.k += 1
            r = Concat(r, self.postfix())
        return r

    def postfix(self) -> Regex:
        r = self.primary()
        while self.tok[1] == "*":
            self.k += 1
            r = Star(r)
        return r

    def primary(self) -> Regex:
        kind, value, _ = self.tok
        if value == "(":
            self.k += 1
            r = self.union()
            self.expect(")")
            return r
        if value == "line":
            self.k += 1
            self.expect("(")
            a = self.ident()
            self.expect(",")
            b = self.ident()
            self.expect(",")
            d = self.ident()
            self.expect(")")
            atom = Atom(a, b, d)
            m = re.fullmatch(r"a_(\w+)", a)
            if m and b == f"b_{m.group(1)}" and d == f"d_{m.group(1)}":
                name = m.group(1)
            else:
                name = f"{a},{b},{d}"
            if self.atoms.setdefault(name, atom) != atom:
                raise LseSemanticError(f"atom name {name!r} used with different parameters")
            return Symbol(name)
        if value == "eps":
            self.k += 1
            return EPS
        if value == "empty":
            self.k += 1
            return EMPTY
        self.error(f"expected a shape, found {value or 'end of input'!r}")

    def constraint(self, out: dict):
        pos = self.tok[2]
        param = self.ident()
        self.expect("in")
        self.expect("[")
        lo = self.number()
        self.expect(",")
        hi = self.number()
        self.expect("]")
        if lo > hi:
            raise LseSemanticError(
                f"empty interval [{lo}, {hi}] for {param!r} at offset {pos}")
        if param in out:
            lo, hi = max(lo, out[param][0]), min(hi, out[param][1])
            if lo > hi:
                raise LseSemanticError(f"constraints on {param!r} do not intersect")
        out[param] = (lo, hi)

    def number(self) -> float:
        if self.tok[0] != "num":
            self.error(f"expected a number, found {self.tok[1]!r}")
        x = float(self.tok[1])
        self.k += 1
        return x


def parse_lse(text: str) -> Lse:
    """Parse ``shape [: p in [lo, hi] and ...]``.

    Atoms ``line(a_X, b_X, d_X)`` become symbol ``X``; other parameter
    triples are named by the triple itself.  ``eps`` and ``empty`` denote the
    empty word and the empty language.
    """
    return _Parser(text).parse()


# -- constrained fit -----------------------------------------------------------------

@dataclass(frozen=True)
class ConstrainedFit:
    a: float
    b: float
    mse: float


def _box(box) -> np.ndarray:
    box = np.asarray(box, dtype=np.float64)
    if box.shape[0] == 4:
        box = np.concatenate([box, [-math.inf, math.inf]])
    return box


def constrained_linefit(sig: Signal, i: int, j: int, box, backend=None) -> ConstrainedFit:
    """Best line over samples ``i..j`` with ``a`` and ``b`` restricted to a box.

    ``box`` is ``(a_lo, a_hi, b_lo, b_hi)``; infinite bounds are allowed.
    The objective is a convex quadratic in (a, b), so when the unconstrained
    optimum falls outside the box the minimum lies on one of its edges, each
    of which is a clamped one-dimensional problem.
    """
    if not 0 <= i <= j < len(sig):
        raise IndexError(f"invalid range [{i}, {j}] for a signal of {len(sig)} samples")
    box = _box(box)
    if box[0] > box[1] or box[2] > box[3]:
        raise ValueError("box bounds must satisfy lo <= hi")
    ps = sig.prefix_sums
    a, b, f = kernels.get(backend).constrained_fit(
        ps.sums, ps.t, ps.v, ps.t_shift, ps.v_shift, i, j, box)
    return ConstrainedFit(a, b, f)


# -- Glushkov automaton --------------------------------------------------------------

@dataclass(frozen=True)
class Glushkov:
    """Position automaton: state 0 is initial, state p >= 1 is the p-th atom occurrence."""

    symbols: tuple[str, ...]  # symbol of position p at index p - 1
    first: frozenset
    last: frozenset
    follow: dict
    nullable: bool

    def follow_matrix(self) -> np.ndarray:
        S = len(self.symbols) + 1
        m = np.zeros((S, S), dtype=np.uint8)
        for q in self.first:
            m[0, q] = 1
        for p, qs in self.follow.items():
            for q in qs:
                m[p, q] = 1
        return m

    def accepts(self, word) -> bool:
        word = list(word)
        if not word:
            return self.nullable
        cur = {q for q in self.first if self.symbols[q - 1] == word[0]}
        for x in word[1:]:
            cur = {q for p in cur for q in self.follow[p] if self.symbols[q - 1] == x}
        return bool(cur & self.last)


def glushkov(r: Regex) -> Glushkov:
    syms: list[str] = []
    follow: dict[int, set] = {}

    def walk(x):
        """Return (nullable, first, last) and fill ``follow``."""
        if isinstance(x, Symbol):
            syms.append(x.name)
            p = len(syms)
            follow[p] = set()
            return False, {p}, {p}
        if isinstance(x, Epsilon):
            return True, set(), set()
        if isinstance(x, Union):
            n1, f1, l1 = walk(x.left)
            n2, f2, l2 = walk(x.right)
            return n1 or n2, f1 | f2, l1 | l2
        if isinstance(x, Concat):
            n1, f1, l1 = walk(x.left)
            n2, f2, l2 = walk(x.right)
            for p in l1:
                follow[p] |= f2
            return n1 and n2, f1 | f2 if n1 else f1, l1 | l2 if n2 else l2
        if isinstance(x, Star):
            n, f, l = walk(x.inner)
            for p in l:
                follow[p] |= f
            return True, f, l
        # Empty: no words at all
        return False, set(), set()

    null, first, last = walk(r)
    return Glushkov(tuple(syms), frozenset(first), frozenset(last),
                    {p: frozenset(q) for p, q in follow.items()}, null)


# -- noisy matching ------------------------------------------------------------------

@dataclass(frozen=True)
class WitnessSegment:
    start: int
    end: int
    symbol: str
    a: float
    b: float
    d: float
    mse: float

    def to_json(self) -> dict:
        return {"start": self.start, "end": self.end, "letter": self.symbol,
                "a": self.a, "b": self.b, "d": self.d, "mse": self.mse}


@dataclass(frozen=True)
class MatchResult:
    matched: bool
    segments: tuple[WitnessSegment, ...] = ()

    def __bool__(self) -> bool:
        return self.matched

    @property
    def cuts(self) -> list[int]:
        if not self.segments:
            return []
        return [self.segments[0].start] + [s.end for s in self.segments]

    def to_json(self) -> dict:
        return {"match": self.matched, "cuts": self.cuts,
                "segments": [s.to_json() for s in self.segments]}


def noisy_match(sig: Signal, lse: Lse, nu: float, backend=None) -> MatchResult:
    """Decide whether ``sig`` is a ``nu``-noisy match of ``lse``; return a witness if so."""
    if not nu >= 0:
        raise ValueError("nu must be non-negative")
    g = glushkov(lse.shape)
    n = len(sig)
    if not g.symbols:
        return MatchResult(g.nullable and n == 1)
    boxes = np.array([lse.box(s) for s in g.symbols], dtype=np.float64)
    ps = sig.prefix_sums
    impl = kernels.get(backend)
    reached, pred_i, pred_s = impl.match_dp(
        ps.sums, ps.t, ps.v, ps.t_shift, ps.v_shift, boxes, g.follow_matrix(), float(nu))
    ends = [q for q in sorted(g.last) if reached[n - 1, q]]
    if not ends:
        return MatchResult(g.nullable and n == 1)
    segments = []
    j, q = n - 1, ends[0]
    while q != 0:
        i, s = int(pred_i[j, q]), int(pred_s[j, q])
        a, b, f = impl.constrained_fit(ps.sums, ps.t, ps.v, ps.t_shift, ps.v_shift, i, j, boxes[q - 1])
        segments.append(WitnessSegment(i, j, g.symbols[q - 1], a, b,
                                       float(sig.times[j] - sig.times[i]), f))
        j, q = i, s
    return MatchResult(True, tuple(reversed(segments)))
