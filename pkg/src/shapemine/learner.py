"""Passive DFA learning from positive words.

A prefix tree acceptor (PTA) is built from the words and generalized by
blue-fringe state merging.  With positive data only, every merge would be
compatible, so labels are closed-world: a PTA state is accepting iff a word
ends there and rejecting otherwise, and each rejecting state is completed
with a rejecting sink on the letters it never continues with.  Accepting
states stay open, which is what lets repeated structure fold into loops.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence


@dataclass(frozen=True)
class Dfa:
    """Deterministic automaton with a partial transition map."""

    n_states: int
    initial: int
    accepting: frozenset
    transitions: dict  # (state, letter) -> state

    @property
    def states(self) -> range:
        return range(self.n_states)

    @property
    def alphabet(self) -> list[str]:
        return sorted({a for _, a in self.transitions})

    def step(self, state: int, letter: str):
        return self.transitions.get((state, letter))

    def accepts(self, word: Iterable[str]) -> bool:
        q = self.initial
        for a in word:
            q = self.transitions.get((q, a))
            if q is None:
                return False
        return q in self.accepting

    def out_edges(self, state: int) -> list[tuple[str, int]]:
        return sorted((a, t) for (s, a), t in self.transitions.items() if s == state)

    def to_json(self) -> dict:
        return {
            "states": self.n_states,
            "initial": self.initial,
            "accepting": sorted(self.accepting),
            "transitions": [[s, a, t] for (s, a), t in sorted(self.transitions.items())],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Dfa":
        return cls(
            obj["states"], obj["initial"], frozenset(obj["accepting"]),
            {(s, a): t for s, a, t in obj["transitions"]},
        )

    def to_dot(self) -> str:
        lines = ["digraph dfa {", "  rankdir=LR;", '  start [shape=point];']
        for q in self.states:
            shape = "doublecircle" if q in self.accepting else "circle"
            lines.append(f"  q{q} [shape={shape}];")
        lines.append(f"  start -> q{self.initial};")
        for (s, a), t in sorted(self.transitions.items()):
            lines.append(f'  q{s} -> q{t} [label="{a}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _canonical(initial: int, accepting, trans: dict[int, dict[str, int]], skip=()) -> Dfa:
    """Renumber the states reachable from ``initial`` breadth-first, letters in order."""
    ids = {initial: 0}
    queue = deque([initial])
    edges = {}
    while queue:
        q = queue.popleft()
        for a in sorted(trans.get(q, {})):
            t = trans[q][a]
            if t in skip:
                continue
            if t not in ids:
                ids[t] = len(ids)
                queue.append(t)
            edges[(ids[q], a)] = ids[t]
    acc = frozenset(ids[q] for q in ids if q in accepting)
    return Dfa(len(ids), 0, acc, edges)


def _letters(word) -> tuple[str, ...]:
    letters = getattr(word, "letters", word)
    return tuple(letters)


def build_pta(words: Sequence) -> Dfa:
    """Prefix tree acceptor of ``words`` (strings or letter sequences)."""
    words = [_letters(w) for w in words]
    if not words:
        raise ValueError("at least one word is required")
    trans: dict[int, dict[str, int]] = {0: {}}
    accepting = set()
    for w in words:
        q = 0
        for a in w:
            nxt = trans[q].get(a)
            if nxt is None:
                nxt = len(trans)
                trans[q][a] = nxt
                trans[nxt] = {}
            q = nxt
        accepting.add(q)
    return _canonical(0, accepting, trans)


class _Merger:
    """Union-find over PTA states with an undo log for trial merges."""

    def __init__(self, pta: Dfa):
        n = pta.n_states
        self.sink = n
        letters = pta.alphabet
        self.label = [q in pta.accepting for q in range(n)] + [False]
        self.parent = list(range(n + 1))
        self.trans: list[dict[str, int]] = [dict() for _ in range(n + 1)]
        for (s, a), t in pta.transitions.items():
            self.trans[s][a] = t
        for q in range(n):
            if not self.label[q]:
                for a in letters:
                    self.trans[q].setdefault(a, self.sink)
        self.trans[self.sink] = {a: self.sink for a in letters}
        self.red: list[int] = [pta.initial]
        self.is_red = [False] * (n + 1)
        self.is_red[pta.initial] = True
        self.log: list[tuple] = []

    def find(self, q: int) -> int:
        while self.parent[q] != q:
            q = self.parent[q]
        return q

    def _rank(self, q: int) -> int:
        return 2 if q == self.sink else 1 if self.is_red[q] else 0

    def merge(self, r: int, b: int) -> bool:
        """Fold ``b`` into ``r``; False (with the log left to undo) on a label clash."""
        stack = [(r, b)]
        while stack:
            x, y = stack.pop()
            x, y = self.find(x), self.find(y)
            if x == y:
                continue
            if self.label[x] != self.label[y]:
                return False
            if self._rank(y) > self._rank(x):
                x, y = y, x
            self.parent[y] = x
            self.log.append(("p", y))
            tx = self.trans[x]
            for a, ty in self.trans[y].items():
                cur = tx.get(a)
                if cur is None:
                    self.log.append(("t", x, a))
                    tx[a] = ty
                else:
                    stack.append((cur, ty))
        return True

    def undo(self, mark: int):
        while len(self.log) > mark:
            entry = self.log.pop()
            if entry[0] == "p":
                self.parent[entry[1]] = entry[1]
            else:
                del self.trans[entry[1]][entry[2]]

    def blue(self) -> list[int]:
        out = set()
        for r in self.red:
            for t in self.trans[self.find(r)].values():
                t = self.find(t)
                if t != self.sink and not self.is_red[t]:
                    out.add(t)
        return sorted(out)

    def result(self) -> Dfa:
        root = self.find(0)
        trans = {}
        seen = {root}
        queue = deque([root])
        while queue:
            q = queue.popleft()
            trans[q] = {}
            for a, t in self.trans[q].items():
                t = self.find(t)
                trans[q][a] = t
                if t not in seen and t != self.sink:
                    seen.add(t)
                    queue.append(t)
        accepting = {q for q in seen if self.label[q]}
        return _canonical(root, accepting, trans, skip={self.sink})


def rpni_merge(pta: Dfa) -> Dfa:
    """Blue-fringe generalization of a prefix tree acceptor.

    The first blue state (PTA breadth-first order) is merged into the first
    red state that accepts it, or promoted to red when none does.
    """
    m = _Merger(pta)
    while True:
        blue = m.blue()
        if not blue:
            break
        b = blue[0]
        for r in m.red:
            if m.merge(r, b):
                m.log.clear()
                break
            m.undo(0)
        else:
            m.red.append(b)
            m.is_red[b] = True
    return m.result()


def learn_dfa(words: Sequence) -> Dfa:
    return rpni_merge(build_pta(words))
