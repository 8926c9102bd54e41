"""DFA to shape-expression translation.

State elimination turns the learned automaton into a regular expression over
letter names; each letter then becomes a ``line(a_X, b_X, d_X)`` atom whose
parameters are constrained by the letter's bounding cube.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import ROUND_CEILING, ROUND_FLOOR, Decimal
from typing import Sequence

from shapemine.learner import Dfa

SIG_DIGITS = 6


# -- regex AST ----------------------------------------------------------------

class Regex:
    __slots__ = ()

    def __str__(self) -> str:
        return format_regex(self)


@dataclass(frozen=True, repr=False)
class Empty(Regex):
    def __repr__(self):
        return "Empty()"


@dataclass(frozen=True, repr=False)
class Epsilon(Regex):
    def __repr__(self):
        return "Epsilon()"


@dataclass(frozen=True)
class Symbol(Regex):
    name: str


@dataclass(frozen=True)
class Union(Regex):
    left: Regex
    right: Regex


@dataclass(frozen=True)
class Concat(Regex):
    left: Regex
    right: Regex


@dataclass(frozen=True)
class Star(Regex):
    inner: Regex


EMPTY = Empty()
EPS = Epsilon()


def nullable(r: Regex) -> bool:
    if isinstance(r, (Epsilon, Star)):
        return True
    if isinstance(r, Union):
        return nullable(r.left) or nullable(r.right)
    if isinstance(r, Concat):
        return nullable(r.left) and nullable(r.right)
    return False


def symbols(r: Regex) -> list[str]:
    """Symbol names in left-to-right order of first occurrence."""
    out: dict[str, None] = {}

    def walk(x):
        if isinstance(x, Symbol):
            out.setdefault(x.name)
        elif isinstance(x, (Union, Concat)):
            walk(x.left)
            walk(x.right)
        elif isinstance(x, Star):
            walk(x.inner)

    walk(r)
    return list(out)


def _flat(r: Regex, kind) -> list[Regex]:
    if isinstance(r, kind):
        return _flat(r.left, kind) + _flat(r.right, kind)
    return [r]


def _nest(items, kind) -> Regex:
    out = items[0]
    for x in items[1:]:
        out = kind(out, x)
    return out


def union(x: Regex, y: Regex) -> Regex:
    """Union with X+0=X, X+X=X, eps+X.X*=X* and eps absorbed by nullable terms."""
    items: list[Regex] = []
    for r in _flat(x, Union) + _flat(y, Union):
        if isinstance(r, Empty) or r in items:
            continue
        items.append(r)
    if not items:
        return EMPTY
    if EPS in items:
        for k, r in enumerate(items):
            if isinstance(r, Concat):
                parts = _flat(r, Concat)
                head, last = parts[:-1], parts[-1]
                first, tail = parts[0], parts[1:]
                if isinstance(last, Star) and _flat(last.inner, Concat) == head:
                    items[k] = last
                    break
                if isinstance(first, Star) and _flat(first.inner, Concat) == tail:
                    items[k] = first
                    break
        if any(nullable(r) for r in items if r != EPS):
            items.remove(EPS)
        deduped: list[Regex] = []
        for r in items:
            if r not in deduped:
                deduped.append(r)
        items = deduped
    return _nest(items, Union)


def concat(x: Regex, y: Regex) -> Regex:
    """Concatenation with X.eps=X and X.0=0."""
    if isinstance(x, Empty) or isinstance(y, Empty):
        return EMPTY
    items = [r for r in _flat(x, Concat) + _flat(y, Concat) if not isinstance(r, Epsilon)]
    if not items:
        return EPS
    return _nest(items, Concat)


def star(x: Regex) -> Regex:
    """Kleene star with 0*=eps*=eps, (X*)*=X* and (eps+X)*=X*."""
    if isinstance(x, (Empty, Epsilon)):
        return EPS
    if isinstance(x, Star):
        return x
    if isinstance(x, Union):
        items = [r for r in _flat(x, Union) if not isinstance(r, Epsilon)]
        if len(items) < len(_flat(x, Union)):
            return star(_nest(items, Union))
    return Star(x)


def _rebuild(r: Regex) -> Regex:
    if isinstance(r, Union):
        return union(_rebuild(r.left), _rebuild(r.right))
    if isinstance(r, Concat):
        return concat(_rebuild(r.left), _rebuild(r.right))
    if isinstance(r, Star):
        return star(_rebuild(r.inner))
    return r


def simplify(r: Regex) -> Regex:
    """Apply the language-preserving rewrites until nothing changes."""
    while True:
        s = _rebuild(r)
        if s == r:
            return s
        r = s


# -- state elimination ----------------------------------------------------------

_START, _FINAL = -1, -2


def _useful_states(dfa: Dfa) -> set[int]:
    fwd = {dfa.initial}
    stack = [dfa.initial]
    while stack:
        q = stack.pop()
        for (s, _), t in dfa.transitions.items():
            if s == q and t not in fwd:
                fwd.add(t)
                stack.append(t)
    back = set(dfa.accepting)
    changed = True
    while changed:
        changed = False
        for (s, _), t in dfa.transitions.items():
            if t in back and s not in back:
                back.add(s)
                changed = True
    return fwd & back


def eliminate_states(dfa: Dfa) -> Regex:
    """Regular expression for the language of ``dfa``.

    Interior states are removed in ascending order of in-degree times
    out-degree (self-loops excluded), ties broken by state id.
    """
    useful = _useful_states(dfa)
    if dfa.initial not in useful:
        return EMPTY
    edges: dict[tuple[int, int], Regex] = {(_START, dfa.initial): EPS}
    for (s, a), t in sorted(dfa.transitions.items()):
        if s in useful and t in useful:
            edges[(s, t)] = union(edges.get((s, t), EMPTY), Symbol(a))
    for q in sorted(dfa.accepting & useful):
        edges[(q, _FINAL)] = union(edges.get((q, _FINAL), EMPTY), EPS)

    remaining = set(useful)
    while remaining:
        def cost(q):
            ins = sum(1 for (p, r) in edges if r == q and p != q)
            outs = sum(1 for (p, r) in edges if p == q and r != q)
            return ins * outs, q

        q = min(remaining, key=cost)
        loop = star(edges.pop((q, q), EMPTY))
        preds = sorted(p for (p, r) in edges if r == q)
        succs = sorted(r for (p, r) in edges if p == q)
        for p in preds:
            for r in succs:
                path = concat(concat(edges[(p, q)], loop), edges[(q, r)])
                edges[(p, r)] = union(edges.get((p, r), EMPTY), path)
        for p in preds:
            del edges[(p, q)]
        for r in succs:
            del edges[(q, r)]
        remaining.discard(q)
    return simplify(edges.get((_START, _FINAL), EMPTY))


# -- shape expressions ----------------------------------------------------------------

Interval = tuple[float, float]


@dataclass(frozen=True)
class Atom:
    a: str
    b: str
    d: str

    @classmethod
    def for_letter(cls, name: str) -> "Atom":
        return cls(f"a_{name}", f"b_{name}", f"d_{name}")

    @property
    def params(self) -> tuple[str, str, str]:
        return (self.a, self.b, self.d)

    def __str__(self) -> str:
        return f"line({self.a}, {self.b}, {self.d})"


@dataclass(frozen=True)
class Lse:
    """Shape regex over named atoms plus interval constraints on their parameters.

    Parameters without a constraint are unbounded.
    """

    shape: Regex
    atoms: dict = field(default_factory=dict)  # symbol name -> Atom
    constraints: dict = field(default_factory=dict)  # parameter -> (lo, hi)

    def interval(self, param: str) -> Interval:
        return self.constraints.get(param, (-math.inf, math.inf))

    def box(self, name: str) -> tuple[float, ...]:
        """``(a_lo, a_hi, b_lo, b_hi, d_lo, d_hi)`` of the atom ``name``."""
        atom = self.atoms[name]
        return tuple(x for p in atom.params for x in self.interval(p))

    def __str__(self) -> str:
        return render_lse(self)


def _round(x: float, mode) -> float:
    if not math.isfinite(x) or x == 0.0:
        return x
    if float(f"{x:.{SIG_DIGITS}g}") == x:
        return x  # already representable; keeps rounding idempotent
    d = Decimal(x)
    exp = d.adjusted() - (SIG_DIGITS - 1)
    return float(d.quantize(Decimal(1).scaleb(exp), rounding=mode))


def round_down(x: float) -> float:
    """Largest 6-significant-digit decimal not above ``x``."""
    return _round(x, ROUND_FLOOR)


def round_up(x: float) -> float:
    """Smallest 6-significant-digit decimal not below ``x``."""
    return _round(x, ROUND_CEILING)


def attach_constraints(r: Regex, alphabet: Sequence) -> Lse:
    """Pair ``r`` with each letter's cube, widened outward to 6 significant digits.

    Widening keeps every cluster member inside its box after a render/parse
    round trip.
    """
    cubes = {letter.name: letter.cube for letter in alphabet}
    atoms, constraints = {}, {}
    for name in sorted(symbols(r)):
        if name not in cubes:
            raise ValueError(f"symbol {name!r} is not in the alphabet")
        atom = Atom.for_letter(name)
        atoms[name] = atom
        for param, (lo, hi) in zip(atom.params, cubes[name]):
            constraints[param] = (round_down(lo), round_up(hi))
    return Lse(r, atoms, constraints)


def _num(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = f"{x:.{SIG_DIGITS}g}"
    return "0" if s == "-0" else s


def format_regex(r: Regex, atoms=None, _level: int = 0) -> str:
    """Concrete syntax with precedence star > '.' > '+'."""
    if isinstance(r, Union):
        text = " + ".join(format_regex(x, atoms, 1) for x in _flat(r, Union))
        return f"({text})" if _level > 0 else text
    if isinstance(r, Concat):
        text = " . ".join(format_regex(x, atoms, 2) for x in _flat(r, Concat))
        return f"({text})" if _level > 1 else text
    if isinstance(r, Star):
        return f"({format_regex(r.inner, atoms, 0)})*"
    if isinstance(r, Symbol):
        return str(atoms[r.name]) if atoms is not None else r.name
    if isinstance(r, Epsilon):
        return "eps"
    return "empty"


def render_lse(lse: Lse) -> str:
    """``shape : p in [lo, hi] and ...``; bounds rounded outward to 6 digits."""
    shape = format_regex(lse.shape, lse.atoms)
    parts = [
        f"{p} in [{_num(round_down(lo))}, {_num(round_up(hi))}]"
        for p, (lo, hi) in lse.constraints.items()
    ]
    return f"{shape} : {' and '.join(parts)}" if parts else shape
