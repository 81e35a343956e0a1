"""Deterministic finite automata: minimization, equivalence and a text format.

Text format (``dfa-v1``)::

    # dfa-v1
    alphabet ab
    states 2
    start 0
    accepting 1
    0 a 1
    0 b 0
    1 a 1
    1 b 0

One ``state symbol state`` line per transition, ordered by state then symbol.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class DFA:
    alphabet: str
    transitions: tuple  # transitions[state][symbol_index] -> state
    start: int
    accepting: tuple  # accepting[state] -> bool

    def __post_init__(self):
        trans = tuple(tuple(int(t) for t in row) for row in self.transitions)
        acc = tuple(bool(a) for a in self.accepting)
        object.__setattr__(self, "transitions", trans)
        object.__setattr__(self, "accepting", acc)
        k = len(self.alphabet)
        if len(acc) != len(trans):
            raise ValueError("one accepting flag per state required")
        for row in trans:
            if len(row) != k:
                raise ValueError("DFA must be total over the alphabet")
            if any(not 0 <= t < len(trans) for t in row):
                raise ValueError("transition target out of range")
        if not 0 <= self.start < len(trans):
            raise ValueError("start state out of range")

    @property
    def n_states(self) -> int:
        return len(self.transitions)

    def step(self, state: int, symbol: str) -> int:
        return self.transitions[state][self.alphabet.index(symbol)]

    def run(self, word: str) -> int:
        s = self.start
        for a in word:
            s = self.step(s, a)
        return s

    def accepts(self, word: str) -> bool:
        return self.accepting[self.run(word)]


@dataclass(frozen=True, eq=False)
class ExtractedDFA(DFA):
    """A DFA whose states remember the word and distribution that created them."""

    representatives: tuple = ()
    distributions: np.ndarray | None = field(default=None, repr=False)
    merge_radius: float | None = None
    provenance: dict = field(default_factory=dict)


def reachable_states(d: DFA) -> list[int]:
    """States reachable from the start, in breadth-first (symbol-order) discovery order."""
    order, seen = [d.start], {d.start}
    queue = deque(order)
    while queue:
        s = queue.popleft()
        for t in d.transitions[s]:
            if t not in seen:
                seen.add(t)
                order.append(t)
                queue.append(t)
    return order


def canonical(d: DFA) -> DFA:
    """Restrict to reachable states and renumber them in BFS order.

    Two DFAs are isomorphic on their reachable parts iff their canonical forms
    have equal fields.
    """
    order = reachable_states(d)
    index = {s: i for i, s in enumerate(order)}
    trans = [[index[t] for t in d.transitions[s]] for s in order]
    acc = [d.accepting[s] for s in order]
    return DFA(d.alphabet, trans, 0, acc)


def is_isomorphic(d1: DFA, d2: DFA) -> bool:
    c1, c2 = canonical(d1), canonical(d2)
    return (
        c1.alphabet == c2.alphabet
        and c1.transitions == c2.transitions
        and c1.accepting == c2.accepting
    )


def minimize_dfa(d: DFA) -> DFA:
    """Minimal equivalent DFA by Hopcroft partition refinement.

    Unreachable states are dropped first; the result is in canonical numbering.
    """
    d = canonical(d)
    n, k = d.n_states, len(d.alphabet)
    inverse = [[[] for _ in range(n)] for _ in range(k)]
    for s, row in enumerate(d.transitions):
        for a, t in enumerate(row):
            inverse[a][t].append(s)

    block_of = [0] * n
    acc = {s for s in range(n) if d.accepting[s]}
    rej = set(range(n)) - acc
    blocks = [b for b in (acc, rej) if b]
    for i, b in enumerate(blocks):
        for s in b:
            block_of[s] = i
    work = [(min(range(len(blocks)), key=lambda i: len(blocks[i])), a) for a in range(k)]
    if len(blocks) == 1:
        work = []
    work = deque(work)
    in_work = set(work)

    while work:
        splitter_id, a = work.popleft()
        in_work.discard((splitter_id, a))
        pre = set()
        for t in blocks[splitter_id]:
            pre.update(inverse[a][t])
        touched = {}
        for s in pre:
            touched.setdefault(block_of[s], set()).add(s)
        for b_id, inside in touched.items():
            block = blocks[b_id]
            if len(inside) == len(block):
                continue
            outside = block - inside
            blocks[b_id] = inside
            new_id = len(blocks)
            blocks.append(outside)
            for s in outside:
                block_of[s] = new_id
            for c in range(k):
                if (b_id, c) in in_work:
                    item = (new_id, c)
                else:
                    item = (b_id, c) if len(inside) <= len(outside) else (new_id, c)
                work.append(item)
                in_work.add(item)

    trans = [[block_of[d.transitions[next(iter(b))][a]] for a in range(k)] for b in blocks]
    accepting = [d.accepting[next(iter(b))] for b in blocks]
    return canonical(DFA(d.alphabet, trans, block_of[d.start], accepting))


def dfa_equiv(d1: DFA, d2: DFA) -> str | None:
    """``None`` if the two DFAs accept the same language, else a shortest counterexample.

    Breadth-first search of the product automaton in symbol order, so the
    counterexample is also first in shortlex order. Compare the result with
    ``is None``: the empty word is a valid counterexample.
    """
    if d1.alphabet != d2.alphabet:
        raise ValueError(f"alphabet mismatch: {d1.alphabet!r} vs {d2.alphabet!r}")
    start = (d1.start, d2.start)
    parent = {start: None}
    queue = deque([start])
    while queue:
        p = queue.popleft()
        if d1.accepting[p[0]] != d2.accepting[p[1]]:
            word = []
            while parent[p] is not None:
                p, a = parent[p]
                word.append(a)
            return "".join(reversed(word))
        for i, a in enumerate(d1.alphabet):
            q = (d1.transitions[p[0]][i], d2.transitions[p[1]][i])
            if q not in parent:
                parent[q] = (p, a)
                queue.append(q)
    return None


def format_dfa(d: DFA) -> str:
    lines = [
        "# dfa-v1",
        f"alphabet {d.alphabet}",
        f"states {d.n_states}",
        f"start {d.start}",
        "accepting " + " ".join(str(s) for s in range(d.n_states) if d.accepting[s]),
    ]
    for s, row in enumerate(d.transitions):
        for a, t in zip(d.alphabet, row):
            lines.append(f"{s} {a} {t}")
    return "\n".join(line.rstrip() for line in lines) + "\n"


def parse_dfa(text: str) -> DFA:
    header, trans_lines = {}, []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, rest = line.partition(" ")
        if key in ("alphabet", "states", "start", "accepting"):
            header[key] = rest.strip()
        else:
            trans_lines.append(line.split())
    alphabet = header["alphabet"]
    n = int(header["states"])
    acc = [False] * n
    for s in header.get("accepting", "").split():
        acc[int(s)] = True
    trans = [[None] * len(alphabet) for _ in range(n)]
    for s, a, t in trans_lines:
        trans[int(s)][alphabet.index(a)] = int(t)
    if any(t is None for row in trans for t in row):
        raise ValueError("DFA text is missing transitions")
    return DFA(alphabet, trans, int(header["start"]), acc)


def from_table(alphabet: str, table: dict, start, accepting) -> DFA:
    """Build a DFA from ``{(state, symbol): state}`` with arbitrary hashable state names."""
    names = []
    for (s, _), t in table.items():
        for x in (s, t):
            if x not in names:
                names.append(x)
    if start not in names:
        names.insert(0, start)
    idx = {s: i for i, s in enumerate(names)}
    trans = [[idx[table[(s, a)]] for a in alphabet] for s in names]
    acc = [s in set(accepting) for s in names]
    return DFA(alphabet, trans, idx[start], acc)
