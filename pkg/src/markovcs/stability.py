"""Perturbation stability of weakly ergodic systems.

If every word of length ``r`` contracts to ``dobrushin <= beta / 7`` and each
letter is perturbed by at most ``beta / r`` in operator norm, word operators
drift by a bounded amount and, with enough isolation slack, the recognized
language is unchanged. :func:`verify_stability` measures all of this by
enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dfa import dfa_equiv
from .ergodicity import (
    NotCertifiedError,
    certify_weak_ergodicity,
    dobrushin_batch,
)
from .errors import MCSError
from .extraction import extract_dfa
from .measures import (
    WORD_BUDGET,
    MarkovOperator,
    MarkovSystem,
    check_budget,
    count_words,
    iter_level_kernels,
    operator_distance,
    word_at,
)
from .recognition import MCS, enumerate_classify

CHAIN_TOL = 1e-9


@dataclass(frozen=True)
class StabilityMargin:
    """Perturbation budget ``epsilon = beta / r`` per letter."""

    beta: float
    r: int
    epsilon: float
    worst_delta: float
    witness: str


def stability_margin(T, beta: float, r_max: int, *, budget: int | None = WORD_BUDGET) -> StabilityMargin:
    """Smallest ``r <= r_max`` with ``dobrushin(P_w) <= beta / 7`` on all ``|w| = r``.

    Raises
    ------
    NotCertifiedError
        If the system does not contract that far within ``r_max``.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    T = T.system if isinstance(T, MCS) else T
    check_budget(count_words(len(T.alphabet), r_max), budget)
    target = beta / 7
    worst = ("", 1.0)
    for r, kernels in iter_level_kernels(T, r_max, budget=None):
        if r == 0:
            continue
        deltas = dobrushin_batch(kernels)
        i = int(np.argmax(deltas))
        worst = (word_at(T.alphabet, r, i), float(deltas[i]))
        if deltas[i] <= target:
            return StabilityMargin(float(beta), r, float(beta) / r, worst[1], worst[0])
    raise NotCertifiedError(
        f"no r <= {r_max} with all Dobrushin coefficients <= beta/7 = {target:.6g}",
        witness=worst[0],
        value=worst[1],
        r=r_max,
    )


def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of ``v`` onto the probability simplex (sort-based)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, len(v) + 1)
    rho = np.nonzero(u * k > css - 1.0)[0][-1]
    shift = (css[rho] - 1.0) / (rho + 1)
    return np.clip(v - shift, 0.0, None)


def _perturb_row(p: np.ndarray, epsilon: float, rng) -> np.ndarray:
    z = rng.standard_normal(p.shape[0])
    z -= z.mean()
    norm = np.abs(z).sum()
    if norm == 0 or epsilon == 0:
        return p.copy()
    q = project_to_simplex(p + z * (epsilon / norm))
    q /= q.sum()
    d = np.abs(q - p).sum()
    if d > epsilon:
        # the projection can lengthen the step in L1; pull back along the segment
        q = p + (q - p) * (epsilon / d)
        q = np.clip(q, 0.0, None)
        q /= q.sum()
    return q


def perturb(T: MarkovSystem, epsilon: float, seed=0, mode: str = "dense") -> MarkovSystem:
    """Random system with every letter within ``epsilon`` of the original.

    ``mode="dense"`` moves every row, ``"sparse"`` one random row per letter.
    Each row gets zero-sum Gaussian noise scaled to L1 length ``epsilon`` and
    is projected back to the simplex; if that overshoots, the step is shrunk.
    The realized distance is never assumed; measure it with
    :func:`~markovcs.measures.operator_distance`.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    if mode not in ("dense", "sparse"):
        raise ValueError(f"unknown mode {mode!r}")
    if epsilon == 0:
        return T
    rng = np.random.default_rng(seed)
    ops = {}
    for a in T.alphabet:
        k = np.array(T.operators[a].kernel)
        rows = range(T.n) if mode == "dense" else [int(rng.integers(T.n))]
        for x in rows:
            k[x] = _perturb_row(k[x], epsilon, rng)
        ops[a] = MarkovOperator(T.space, k)
    return T.replace_operators(ops)


def collapse_perturbation(T: MarkovSystem, cell: int, strength: float = 1.0) -> MarkovSystem:
    """Mix every letter toward the constant operator onto ``cell``.

    At ``strength=1`` every nonempty word ends at the point mass on ``cell``;
    this is the deliberately over-large perturbation used to show the
    stability margin is not vacuous.
    """
    target = np.zeros(T.n)
    target[cell] = 1.0
    ops = {
        a: MarkovOperator(T.space, (1 - strength) * op.kernel + strength * target[None, :])
        for a, op in T.operators.items()
    }
    return T.replace_operators(ops)


@dataclass
class StabilityReport:
    horizon: int
    beta: float | None
    r: int | None
    letter_distance: float
    max_word_distance: float
    worst_word: str
    within_beta: bool | None
    length_chain_violations: int
    suffix_chain_violations: int
    transfer_violations: int
    perturbed_certificate: tuple | None
    disagreements: int
    disagreement_witness: str | None
    undecided_original: int
    undecided_perturbed: int
    dfa_equal: bool | None
    dfa_counterexample: str | None
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (
            self.within_beta is not False
            and self.length_chain_violations == 0
            and self.suffix_chain_violations == 0
            and self.transfer_violations == 0
            and self.disagreements == 0
            and self.dfa_equal is not False
        )


def _check_similar(a: MarkovSystem, b: MarkovSystem):
    if a.alphabet != b.alphabet or a.space != b.space:
        raise ValueError("systems are not similar: alphabet or state space differ")


def verify_stability(
    M: MCS,
    perturbed,
    horizon: int,
    *,
    beta: float | None = None,
    r: int | None = None,
    extract: bool = True,
    budget: int | None = WORD_BUDGET,
) -> StabilityReport:
    """Compare ``M`` with a perturbed copy on every word up to ``horizon``.

    ``perturbed`` is a :class:`MarkovSystem` (the recognizer of ``M`` is
    reused) or an :class:`MCS` with the same recognizer. ``r`` is the block
    length of the unperturbed margin; it enables the suffix chain check and
    the re-certification of the perturbed system.

    The two inequalities checked per word ``w`` are, with ``eps`` the largest
    letter distance,

    * ``||P_w - P~_w|| <= |w| * eps``;
    * ``||P_w - P~_w|| <= 4 dobrushin(P_v) + 3 ||P_v - P~_v||`` where ``v`` is
      the last ``r`` letters of ``w`` (the block applied last).

    A perturbed system that is no longer a recognizer is reported through the
    undecided counts, not raised.
    """
    T = M.system
    Tp = perturbed.system if isinstance(perturbed, MCS) else perturbed
    _check_similar(T, Tp)
    k = len(T.alphabet)
    check_budget(count_words(k, horizon), budget)
    eps = max(operator_distance(T.operators[a], Tp.operators[a]) for a in T.alphabet)

    max_dist, worst_word = 0.0, ""
    len_viol = suf_viol = transfer_viol = 0
    suffix_delta = suffix_dist = None
    gen_a = iter_level_kernels(T, horizon, budget=None)
    gen_b = iter_level_kernels(Tp, horizon, budget=None)
    for (length, ka), (_, kb) in zip(gen_a, gen_b):
        dist = np.abs(ka - kb).sum(axis=2).max(axis=1)
        i = int(np.argmax(dist))
        if dist[i] > max_dist:
            max_dist = float(dist[i])
            worst_word = word_at(T.alphabet, length, i)
        len_viol += int(np.sum(dist > length * eps + CHAIN_TOL))
        da, db = dobrushin_batch(ka), dobrushin_batch(kb)
        transfer_viol += int(np.sum(db > da + dist + CHAIN_TOL))
        if r is not None:
            if length == r:
                suffix_delta, suffix_dist = da, dist
            if length >= r and suffix_delta is not None:
                suffix = np.arange(ka.shape[0]) % (k**r)
                bound = 4 * suffix_delta[suffix] + 3 * suffix_dist[suffix]
                suf_viol += int(np.sum(dist > bound + CHAIN_TOL))

    cert = None
    if r is not None:
        try:
            c = certify_weak_ergodicity(Tp, r, budget=budget)
            cert = (c.r, c.delta_bar)
        except NotCertifiedError:
            cert = None

    res_a = enumerate_classify(M, horizon, strict=False, budget=budget)
    res_b = enumerate_classify(M.with_system(Tp), horizon, strict=False, budget=budget)
    diff = [w for w in res_a if res_a[w] != res_b[w]]
    und_a, und_b = len(res_a.undecided()), len(res_b.undecided())

    notes = []
    dfa_equal, cex = None, None
    if extract and und_a == 0 and und_b == 0:
        try:
            d1 = extract_dfa(M)
            d2 = extract_dfa(M.with_system(Tp))
            cex = dfa_equiv(d1, d2)
            dfa_equal = cex is None
        except MCSError as exc:
            notes.append(f"extraction skipped: {exc}")

    return StabilityReport(
        horizon=horizon,
        beta=beta,
        r=r,
        letter_distance=eps,
        max_word_distance=max_dist,
        worst_word=worst_word,
        within_beta=None if beta is None else bool(max_dist <= beta + CHAIN_TOL),
        length_chain_violations=len_viol,
        suffix_chain_violations=suf_viol,
        transfer_violations=transfer_viol,
        perturbed_certificate=cert,
        disagreements=len(diff),
        disagreement_witness=diff[0] if diff else None,
        undecided_original=und_a,
        undecided_perturbed=und_b,
        dfa_equal=dfa_equal,
        dfa_counterexample=cex,
        notes=notes,
    )
