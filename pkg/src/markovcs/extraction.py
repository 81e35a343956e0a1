"""Regular and definite language extraction, and empirical covering numbers.

:func:`extract_dfa` is the Rabin reduction made constructive. Two words whose
distributions are closer than the recognizer gap are equivalent for the
recognized language, because every Markov operator is a contraction. Walking
words breadth first and merging each new distribution into an existing
representative closer than ``merge_radius`` therefore builds the
right-congruence automaton of the language.

:func:`definite_order` and :func:`definite_language_table` handle the weakly
ergodic case, where the last ``r`` letters decide membership.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .dfa import ExtractedDFA
from .ergodicity import NotCertifiedError, dobrushin_batch
from .errors import MCSError, NotARecognizerError
from .measures import (
    WORD_BUDGET,
    MarkovSystem,
    check_budget,
    count_words,
    iter_orbit,
    iter_words,
    level_kernels,
)
from .recognition import MCS, Verdict, classify, induced_gap

DEFAULT_MAX_STATES = 10_000


class ExtractionLimitError(MCSError):
    """Extraction hit ``max_states`` or ``max_frontier_len`` before closing.

    Under quasi-compactness the state count is finite for every radius below
    the gap; hitting the limit means no finite extraction was found at this
    radius within budget.
    """

    def __init__(self, message, n_states, frontier_word):
        self.n_states = n_states
        self.frontier_word = frontier_word
        super().__init__(message)


def _decided(M: MCS, word: str, dist: np.ndarray) -> Verdict:
    c = classify(M.recognizer, dist, word)
    if c.verdict is Verdict.UNDECIDED:
        raise NotARecognizerError(word, c.margin)
    return c.verdict


def extract_dfa(
    M: MCS,
    merge_radius: float | None = None,
    max_states: int = DEFAULT_MAX_STATES,
    max_frontier_len: int | None = None,
) -> ExtractedDFA:
    """Extract the automaton of the language recognized by ``M``.

    Parameters
    ----------
    M : MCS
        Markov system with a recognizer of gap ``rho``.
    merge_radius : float, optional
        Distributions closer than this (L1) are merged. Must satisfy
        ``0 < merge_radius < rho``; defaults to ``rho / 2``.
    max_states, max_frontier_len : int
        Budgets; exceeding either raises :class:`ExtractionLimitError`.

    Returns
    -------
    ExtractedDFA
        State ``i`` carries the representative word that created it and its
        distribution. Words are visited in shortlex order and only
        representatives are extended, so numbering is deterministic.
    """
    rho = induced_gap(M.recognizer)
    t = rho / 2 if merge_radius is None else float(merge_radius)
    if not 0 < t < rho:
        raise ValueError(f"merge radius must lie in (0, {rho})")
    T = M.system
    kernels = T.kernels
    reps = [""]
    dists = [T.initial.mass.copy()]
    accepting = [_decided(M, "", dists[0]) is Verdict.ACCEPT]
    trans: list[list[int]] = [[-1] * len(T.alphabet)]
    stack = np.array(dists)
    queue = deque([0])
    n_matched = 0
    while queue:
        s = queue.popleft()
        for ai, a in enumerate(T.alphabet):
            word = reps[s] + a
            d = dists[s] @ kernels[ai]
            verdict = _decided(M, word, d)
            gaps = np.abs(stack - d).sum(axis=1)
            close = np.flatnonzero(gaps < t)
            if close.size:
                target = int(close[0])
                n_matched += 1
                if accepting[target] != (verdict is Verdict.ACCEPT):
                    raise MCSError(
                        f"word {word!r} merged across the cut; merge radius too large"
                    )
            else:
                if len(reps) >= max_states:
                    raise ExtractionLimitError(
                        f"more than {max_states} states at radius {t}", len(reps), word
                    )
                if max_frontier_len is not None and len(word) > max_frontier_len:
                    raise ExtractionLimitError(
                        f"frontier reached length {len(word)} at radius {t}", len(reps), word
                    )
                target = len(reps)
                reps.append(word)
                dists.append(d)
                accepting.append(verdict is Verdict.ACCEPT)
                trans.append([-1] * len(T.alphabet))
                stack = np.vstack([stack, d[None]])
                queue.append(target)
            trans[s][ai] = target
    return ExtractedDFA(
        T.alphabet,
        trans,
        0,
        accepting,
        representatives=tuple(reps),
        distributions=stack,
        merge_radius=t,
        provenance={"method": "rabin", "gap": rho, "matched_words": n_matched},
    )


@dataclass(frozen=True)
class DefiniteCertificate:
    """All words of length ``r_star`` contract below half the recognizer gap.

    ``suffix_profiles[u]`` is ``P_u`` applied to the uniform distribution; every
    ``P_u nu`` lies within ``2 * worst_delta`` of it.
    """

    r_star: int
    worst_delta: float
    gap: float
    witness: str
    suffix_profiles: dict = field(repr=False, default_factory=dict)


def definite_order(
    M: MCS, r_max: int, *, budget: int | None = WORD_BUDGET
) -> DefiniteCertificate:
    """Smallest ``r <= r_max`` with ``dobrushin(P_u) < rho / 2`` for every ``|u| = r``.

    Then ``||P_{wu} mu_0 - P_u mu_0||_1 <= 2 dobrushin(P_u) < rho`` for every
    prefix ``w``, so ``wu`` and ``u`` get the same verdict.

    Raises
    ------
    NotCertifiedError
        With the worst word at ``r_max``.
    """
    if r_max < 1:
        raise ValueError("r_max must be at least 1")
    T = M.system
    check_budget(count_words(len(T.alphabet), r_max), budget)
    rho = induced_gap(M.recognizer)
    uniform = np.full(T.n, 1.0 / T.n)
    worst = ("", 1.0)
    for r in range(1, r_max + 1):
        kernels = level_kernels(T, r, budget=None)
        deltas = dobrushin_batch(kernels)
        i = int(np.argmax(deltas))
        words = list(iter_words(T.alphabet, r))
        worst = (words[i], float(deltas[i]))
        if deltas[i] < rho / 2:
            profiles = {u: uniform @ k for u, k in zip(words, kernels)}
            return DefiniteCertificate(r, float(deltas[i]), rho, words[i], profiles)
    raise NotCertifiedError(
        f"no r <= {r_max} with all Dobrushin coefficients below {rho / 2:.6g}; "
        f"worst word {worst[0]!r} has {worst[1]:.6g}",
        witness=worst[0],
        value=worst[1],
        r=r_max,
    )


def definite_language_table(M: MCS, cert: DefiniteCertificate) -> ExtractedDFA:
    """Suffix automaton of the definite language certified by ``cert``.

    States are the words shorter than ``r_star`` (a prefix tree) followed by
    the words of length exactly ``r_star``; the latter stand for every word
    with that suffix. Each state's verdict comes from its own distribution
    ``P_u mu_0``.
    """
    T = M.system
    r = cert.r_star
    words, dist_list = [], []
    for length, dists in iter_orbit(T, r):
        words.extend(iter_words(T.alphabet, length))
        dist_list.append(dists)
    dists = np.vstack(dist_list)
    index = {w: i for i, w in enumerate(words)}
    accepting = [_decided(M, w, d) is Verdict.ACCEPT for w, d in zip(words, dists)]
    trans = []
    for w in words:
        row = []
        for a in T.alphabet:
            nxt = w + a
            row.append(index[nxt if len(nxt) <= r else nxt[1:]])
        trans.append(row)
    return ExtractedDFA(
        T.alphabet,
        trans,
        0,
        accepting,
        representatives=tuple(words),
        distributions=dists,
        merge_radius=None,
        provenance={"method": "definite", "r_star": r, "worst_delta": cert.worst_delta},
    )


@dataclass(frozen=True)
class CoveringReport:
    """Greedy net sizes over all words of length at most ``L``, for each ``L``.

    A point opens a new center unless it is closer than ``epsilon`` to an
    existing one, so every point lies in a set of diameter below
    ``2 * epsilon``. The sizes are upper estimates, not exact covering numbers.
    """

    epsilon: float
    counts: dict
    stabilized_at: int | None
    n_points: int
    center_words: tuple = ()


def _stabilization(counts: dict) -> int | None:
    lengths = sorted(counts)
    last = counts[lengths[-1]]
    if len(lengths) > 1 and counts[lengths[-2]] != last:
        return None
    return min(L for L in lengths if counts[L] == last)


def _greedy_cover(points_by_level, epsilon: float, distance) -> CoveringReport:
    centers = None
    n_centers, center_words, counts = 0, [], {}
    n_points = 0
    for length, words, pts in points_by_level:
        for w, p in zip(words, pts):
            n_points += 1
            if n_centers and np.any(distance(centers[:n_centers], p) < epsilon):
                continue
            if centers is None:
                centers = np.empty((16,) + p.shape)
            elif n_centers == centers.shape[0]:
                centers = np.concatenate([centers, np.empty_like(centers)])
            centers[n_centers] = p
            n_centers += 1
            center_words.append(w)
        counts[length] = n_centers
    return CoveringReport(
        float(epsilon), counts, _stabilization(counts), n_points, tuple(center_words)
    )


def orbit_cover(
    M, epsilon: float, max_len: int, *, budget: int | None = WORD_BUDGET
) -> CoveringReport:
    """Greedy ``epsilon``-net of the reachable distributions ``{P_w mu_0 : |w| <= L}``."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    T = M.system if isinstance(M, MCS) else M

    def levels():
        for length, dists in iter_orbit(T, max_len, budget=budget):
            yield length, iter_words(T.alphabet, length), dists

    return _greedy_cover(levels(), epsilon, lambda c, p: np.abs(c - p).sum(axis=1))


def _iter_kernel_levels(T: MarkovSystem, max_len: int, chunk: int = 256):
    """Like :func:`iter_level_kernels` but never materializes the last level."""
    n = T.n
    prev = np.eye(n)[None]
    yield 0, [""], prev
    for length in range(1, max_len + 1):
        keep = length < max_len
        parts = []

        def gen(prev=prev, keep=keep, parts=parts):
            for i in range(0, prev.shape[0], chunk):
                block = np.matmul(prev[i : i + chunk, None], T.kernels[None]).reshape(-1, n, n)
                if keep:
                    parts.append(block)
                yield from block

        yield length, iter_words(T.alphabet, length), gen()
        if keep:
            prev = np.concatenate(parts)


def operator_cover(
    T, epsilon: float, max_len: int, *, budget: int | None = WORD_BUDGET
) -> CoveringReport:
    """Greedy ``epsilon``-net of the word operators ``{P_w : |w| <= L}``.

    Distance is the induced operator norm, the largest row L1 distance.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    T = T.system if isinstance(T, MCS) else T
    check_budget(count_words(len(T.alphabet), max_len), budget)
    return _greedy_cover(
        _iter_kernel_levels(T, max_len),
        epsilon,
        lambda c, p: np.abs(c - p).sum(axis=2).max(axis=1),
    )
