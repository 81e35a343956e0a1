"""Shared generators for the test suite."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import strategies as st

from markovcs.measures import MarkovOperator, MarkovSystem, SignedMeasure, StateSpace, iter_orbit

ACCEPTANCE_LINES = pytest.StashKey[list]()


def stochastic(rng, n, min_entry=0.0, sparsity=0.0):
    k = rng.random((n, n))
    if sparsity:
        k[rng.random((n, n)) < sparsity] = 0.0
        empty = k.sum(axis=1) == 0
        k[empty, 0] = 1.0
    k /= k.sum(axis=1, keepdims=True)
    if min_entry:
        k = min_entry + (1 - n * min_entry) * k
    return k


@st.composite
def kernels(draw, min_n=1, max_n=8, n=None):
    """Row-stochastic matrices drawn from a seeded generator, sometimes sparse."""
    n = n if n is not None else draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    sparsity = draw(st.sampled_from([0.0, 0.0, 0.5, 0.8]))
    return stochastic(np.random.default_rng(seed), n, sparsity=sparsity)


@st.composite
def systems(draw, max_n=6, alphabets=("a", "ab", "abc")):
    n = draw(st.integers(1, max_n))
    alphabet = draw(st.sampled_from(alphabets))
    ks = [draw(kernels(n=n)) for _ in alphabet]
    space = StateSpace.of_size(n)
    ops = {a: MarkovOperator(space, k) for a, k in zip(alphabet, ks)}
    return MarkovSystem(alphabet, ops, SignedMeasure.point_mass(space, 0))


@st.composite
def signed_vectors(draw, min_n=1, max_n=12):
    n = draw(st.integers(min_n, max_n))
    return np.array(
        draw(st.lists(st.floats(-5, 5, allow_nan=False, allow_subnormal=False), min_size=n, max_size=n))
    )


def make_system(kernel_dict, initial=0):
    n = len(next(iter(kernel_dict.values())))
    space = StateSpace.of_size(n)
    ops = {}
    for a, k in kernel_dict.items():
        ops[a] = MarkovOperator.from_rational(space, k) if _rational(k) else MarkovOperator(space, k)
    return MarkovSystem("".join(kernel_dict), ops, SignedMeasure.point_mass(space, initial))


def _rational(k):
    return all(isinstance(v, (int, Fraction)) for row in k for v in row)


def dfa_mismatches(dfa, oracle):
    """Words where ``dfa`` and an oracle result disagree (Accept vs not)."""
    return [w for w, v in oracle.items() if dfa.accepts(w) != (v.value == "Accept")]


def dfa_level_mismatches(dfa, M, max_len):
    """Vectorized count of DFA/oracle disagreements over all words up to ``max_len``."""
    trans = np.array(dfa.transitions)
    acc = np.array(dfa.accepting)
    rec = M.recognizer
    states = np.array([dfa.start])
    bad = 0
    for length, dists in iter_orbit(M.system, max_len):
        if length:
            states = trans[states].reshape(-1)
        codes = rec.verdicts(rec.margin(dists))
        if np.any(codes == 0):
            raise AssertionError("oracle has undecided words")
        bad += int(np.sum(acc[states] != (codes == 1)))
    return bad


def dfa_shortlex_accepts(dfa, max_len):
    """Acceptance of every word up to ``max_len``, in shortlex order."""
    trans = np.array(dfa.transitions)
    acc = np.array(dfa.accepting)
    states = np.array([dfa.start])
    out = [acc[states]]
    for _ in range(max_len):
        states = trans[states].reshape(-1)
        out.append(acc[states])
    return np.concatenate(out)
