"""Ready-made systems: the three-cell example, embedded automata, random
weakly ergodic systems and the Gaussian two-map system.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .dfa import DFA, from_table
from .discretize import KernelSpec, RegionRecognizer, affine_map, build_mcs
from .ergodicity import dobrushin_batch
from .measures import (
    MarkovOperator,
    MarkovSystem,
    SignedMeasure,
    StateSpace,
    iter_orbit,
    level_kernels,
)
from .recognition import MCS, Recognizer


def three_state_example() -> MCS:
    """One letter, ``P(x, y) = 1/2`` for ``x != y`` on three cells, started at cell 0.

    The recognizer (``F = {0}``, cut 1/3, isolation 1/20) is NOT total: the
    acceptance probability after ``n`` steps is ``1/3 + (2/3)(-1/2)**n``,
    which enters the isolation band at ``n = 4``.
    """
    space = StateSpace.of_size(3)
    h = Fraction(1, 2)
    rows = [[0, h, h], [h, 0, h], [h, h, 0]]
    T = MarkovSystem("a", {"a": MarkovOperator.from_rational(space, rows)},
                     SignedMeasure.point_mass(space, 0))
    return MCS(T, Recognizer((0,), Fraction(1, 3), Fraction(1, 20)))


def embed_dfa(d: DFA, cut=Fraction(1, 2), isolation=Fraction(2, 5)) -> MCS:
    """Markov system with 0/1 kernels copying the transitions of ``d``."""
    space = StateSpace.of_size(d.n_states)
    ops = {}
    for i, a in enumerate(d.alphabet):
        rows = [[Fraction(0)] * d.n_states for _ in range(d.n_states)]
        for s in range(d.n_states):
            rows[s][d.transitions[s][i]] = Fraction(1)
        ops[a] = MarkovOperator.from_rational(space, rows)
    T = MarkovSystem(d.alphabet, ops, SignedMeasure.point_mass(space, d.start))
    acc = [s for s in range(d.n_states) if d.accepting[s]]
    return MCS(T, Recognizer(acc, cut, isolation))


def ends_in_a_dfa() -> DFA:
    return from_table("ab", {(0, "a"): 1, (0, "b"): 0, (1, "a"): 1, (1, "b"): 0}, 0, [1])


def even_parity_dfa() -> DFA:
    """Words with an even number of ``a``."""
    return from_table("ab", {(0, "a"): 1, (0, "b"): 0, (1, "a"): 0, (1, "b"): 1}, 0, [0])


def contains_ab_dfa() -> DFA:
    return from_table(
        "ab",
        {(0, "a"): 1, (0, "b"): 0, (1, "a"): 1, (1, "b"): 2, (2, "a"): 2, (2, "b"): 2},
        0,
        [2],
    )


def contains_ab_redundant_dfa() -> DFA:
    """Non-minimal four-state DFA for ``contains ab``: the accepting sink is split in two."""
    return from_table(
        "ab",
        {
            (0, "a"): 1, (0, "b"): 0,
            (1, "a"): 1, (1, "b"): 2,
            (2, "a"): 3, (2, "b"): 2,
            (3, "a"): 3, (3, "b"): 2,
        },
        0,
        [2, 3],
    )


def fit_cut_point(T: MarkovSystem, accepting, probe_len: int = 6, slack: float = 0.5,
                  digits: int = 4) -> Recognizer:
    """Place a cut point in the widest gap of acceptance probabilities.

    Acceptance probabilities of all words up to ``probe_len`` are sorted and
    the cut goes in the middle of the widest gap lying between two nonempty
    words, so the empty word alone cannot decide the language. A longer word
    ``pu`` with ``|u| = probe_len`` differs from ``u`` in acceptance
    probability by at most ``dobrushin(P_u)``, so the usable half-width is the
    half gap minus that tail; the isolation is ``slack`` times it, leaving the
    rest as margin for every word of every length. Values are rounded to
    ``digits`` decimals so they serialize exactly.

    Raises
    ------
    ValueError
        If the tail bound swallows the widest gap.
    """
    accepting = tuple(accepting)
    values = [dists[:, list(accepting)].sum(axis=1) for _, dists in iter_orbit(T, probe_len)]
    inner = np.concatenate(values[1:])
    v = np.unique(np.concatenate(values))
    v = v[(v >= inner.min()) & (v <= inner.max())]
    if v.size < 2:
        raise ValueError("acceptance probability is constant; no interior gap")
    tail = float(dobrushin_batch(level_kernels(T, probe_len)).max())
    gaps = np.diff(v)
    i = int(np.argmax(gaps))
    half = gaps[i] / 2 - tail
    if half <= 0:
        raise ValueError(f"widest gap {gaps[i]:.4g} too small for tail bound {tail:.4g}")
    scale = 10**digits
    mid = (v[i] + v[i + 1]) / 2
    cut = Fraction(round(mid * scale), scale)
    # rounding the cut eats into the half-width
    room = half - abs(float(cut) - mid)
    iso = Fraction(int(slack * room * scale), scale)
    if iso <= 0:
        raise ValueError("isolation rounds to zero; increase digits")
    return Recognizer(accepting, cut, iso)


def random_rational_kernel(rng, n: int, max_weight: int = 9, floor: int = 1) -> list:
    """Rows of integer weights normalized to exact fractions; all entries positive."""
    rows = []
    for _ in range(n):
        w = rng.integers(0, max_weight + 1, size=n) ** 2 + floor
        total = int(w.sum())
        rows.append([Fraction(int(x), total) for x in w])
    return rows


def random_weakly_ergodic(seed: int, n: int = 4, alphabet: str = "ab", noise=Fraction(2, 5),
                          probe_len: int = 6, **fit) -> MCS:
    """Random rational system with strictly positive kernels and a fitted cut point.

    Each letter mixes a random deterministic map (weight ``1 - noise``) with a
    random positive kernel (weight ``noise``). Positive kernels satisfy the
    strong Doeblin condition, so the system is weakly ergodic with ``r = 1``,
    while the deterministic part keeps a few letters of memory. The accepting
    set is the first half of the cells; the initial cell is 0.
    """
    rng = np.random.default_rng(seed)
    noise = Fraction(noise)
    space = StateSpace.of_size(n)
    ops = {}
    for a in alphabet:
        target = rng.integers(n, size=n)
        rows = random_rational_kernel(rng, n)
        for x, row in enumerate(rows):
            rows[x] = [noise * p for p in row]
            rows[x][target[x]] += 1 - noise
        ops[a] = MarkovOperator.from_rational(space, rows)
    T = MarkovSystem(alphabet, ops, SignedMeasure.point_mass(space, 0))
    rec = fit_cut_point(T, range(n // 2), probe_len=probe_len, **fit)
    return MCS(T, rec)


def random_stochastic(rng, n: int, min_entry: float = 0.0, sparsity: float = 0.0) -> np.ndarray:
    """Random row-stochastic matrix; ``sparsity`` zeroes that fraction of entries."""
    k = rng.random((n, n))
    if sparsity:
        k[rng.random((n, n)) < sparsity] = 0.0
        empty = k.sum(axis=1) == 0
        k[empty, rng.integers(n, size=int(empty.sum()))] = 1.0
    k /= k.sum(axis=1, keepdims=True)
    if min_entry:
        k = min_entry + (1 - n * min_entry) * k
    return k


def gaussian_two_map_spec(sigma: float = 0.3, grid_n: int = 64, boundary: str = "reflect") -> KernelSpec:
    """``a`` squeezes ``[0, 1]`` into ``[0, 1/4]``, ``b`` into ``[3/4, 1]``."""
    return KernelSpec(
        (0.0, 1.0),
        {"a": affine_map(0.25, 0.0), "b": affine_map(0.25, 0.75)},
        sigma,
        boundary,
        grid_n,
    )


GAUSSIAN_RECOGNIZER = RegionRecognizer((0.5, 1.0), 0.5, 0.1)


def gaussian_two_map(sigma: float = 0.3, grid_n: int = 64, initial=0.5) -> MCS:
    """Gaussian two-map system accepting when at least half the mass sits in ``[1/2, 1]``."""
    return build_mcs(gaussian_two_map_spec(sigma, grid_n), GAUSSIAN_RECOGNIZER, initial)
