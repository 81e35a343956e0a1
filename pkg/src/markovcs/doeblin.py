"""Doeblin's Condition D, bounded densities, and the compact-plus-small split.

Condition D for a kernel ``P`` asks for a reference probability ``mu`` and
constants ``theta, eta > 0`` such that every set ``A`` with ``mu(A) >= theta``
receives ``P(x, A) >= eta`` from every cell ``x``. A kernel with density at
most ``K`` with respect to ``mu`` satisfies it with ``eta >= 1 - K (1 - theta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ergodicity import NotCertifiedError
from .measures import (
    WORD_BUDGET,
    MarkovOperator,
    MarkovSystem,
    SignedMeasure,
    StateSpace,
    check_budget,
    iter_words,
    level_kernels,
)

THETA_GRID = tuple(round(0.1 * i, 1) for i in range(1, 10))
EXHAUSTIVE_MAX_N = 20
_MASS_SLACK = 1e-12


def _kernel(P) -> np.ndarray:
    return P.kernel if isinstance(P, MarkovOperator) else np.asarray(P, dtype=float)


def _mass(mu, n) -> np.ndarray:
    if mu is None:
        return np.full(n, 1.0 / n)
    return mu.mass if isinstance(mu, SignedMeasure) else np.asarray(mu, dtype=float)


def bounded_density(P, mu=None) -> float:
    """Smallest ``K`` with ``P[x, y] <= K * mu[y]`` for all cells.

    Returns ``math.inf`` when ``P`` puts mass on a cell that ``mu`` does not
    charge. ``mu`` defaults to the uniform measure.
    """
    k = _kernel(P)
    m = _mass(mu, k.shape[0])
    support = m > 0
    if np.any(k[:, ~support] > 0):
        return math.inf
    return float((k[:, support] / m[support]).max())


def _subset_bits(start: int, stop: int, n: int) -> np.ndarray:
    ids = np.arange(start, stop, dtype=np.int64)
    return ((ids[:, None] >> np.arange(n)) & 1).astype(float)


def _eta_exhaustive(k: np.ndarray, m: np.ndarray, theta: float, chunk: int = 1 << 15) -> float:
    n = k.shape[0]
    best = 1.0
    for start in range(0, 1 << n, chunk):
        bits = _subset_bits(start, min(start + chunk, 1 << n), n)
        ok = bits @ m >= theta - _MASS_SLACK
        if ok.any():
            best = min(best, float((bits[ok] @ k.T).min()))
    return best


def _eta_greedy(k: np.ndarray, m: np.ndarray, theta: float) -> float:
    """Fractional-knapsack lower bound on the exact subset minimum.

    For each row, cells are filled in increasing order of ``P[x, y] / mu[y]``
    until ``theta`` of reference mass is collected; the last cell counts
    fractionally. The relaxation can only lower the minimum.
    """
    support = m > 0
    ms = m[support]
    best = 1.0
    for row in k[:, support]:
        order = np.argsort(row / ms, kind="stable")
        cum = np.cumsum(ms[order])
        j = int(np.searchsorted(cum, theta - _MASS_SLACK))
        j = min(j, len(order) - 1)
        before = cum[j - 1] if j > 0 else 0.0
        frac = min(1.0, max(0.0, (theta - before) / ms[order[j]]))
        val = row[order[:j]].sum() + frac * row[order[j]]
        best = min(best, float(val))
    return max(best, 0.0)


def condition_d_check(
    P,
    mu=None,
    theta: float = 0.5,
    *,
    mode: str = "auto",
    max_exhaustive_n: int = EXHAUSTIVE_MAX_N,
) -> float:
    """Largest ``eta`` for which Condition D holds at ``theta``.

    ``mode="exhaustive"`` minimizes ``P(x, A)`` over every cell subset with
    ``mu(A) >= theta`` (exact, exponential in ``n``). ``mode="greedy"`` returns
    a lower bound from a fractional relaxation. ``"auto"`` picks exhaustive up
    to ``max_exhaustive_n`` cells. Condition D holds when the result is positive.
    """
    if not 0 < theta <= 1:
        raise ValueError("theta must lie in (0, 1]")
    k = _kernel(P)
    n = k.shape[0]
    m = _mass(mu, n)
    if mode == "auto":
        mode = "exhaustive" if n <= max_exhaustive_n else "greedy"
    if mode == "exhaustive":
        check_budget(n, max_exhaustive_n, what="cells for exhaustive subset search")
        return _eta_exhaustive(k, m, theta)
    if mode == "greedy":
        return _eta_greedy(k, m, theta)
    raise ValueError(f"unknown mode {mode!r}")


def scan_condition_d(P, mu=None, thetas=THETA_GRID, **kw) -> list[tuple[float, float]]:
    """``(theta, eta)`` pairs over a grid of ``theta`` values."""
    return [(float(t), condition_d_check(P, mu, t, **kw)) for t in thetas]


@dataclass(frozen=True)
class Decomposition:
    """``P = Q + R`` with ``Q`` density-bounded by ``C`` and ``R`` the remainder."""

    Q: MarkovOperator
    R: MarkovOperator
    C: float
    eta_resid: float

    @property
    def residual_mass(self) -> float:
        return 1.0 - self.eta_resid


def yosida_decompose(P: MarkovOperator, mu=None, C: float = 1.0) -> Decomposition:
    """Split ``P`` into ``Q = min(P, C mu)`` and ``R = P - Q``.

    ``eta_resid`` is one minus the largest row mass of ``R``, so the induced
    norm of ``R`` is ``1 - eta_resid``.
    """
    if C < 0:
        raise ValueError("C must be nonnegative")
    k = _kernel(P)
    m = _mass(mu, k.shape[0])
    if np.any(k[:, m <= 0] > 0):
        raise ValueError("reference measure lacks support where the kernel moves mass")
    q = np.minimum(k, C * m[None, :])
    r = k - q
    space = P.space if isinstance(P, MarkovOperator) else StateSpace.of_size(k.shape[0])
    Q = MarkovOperator(space, q, substochastic=True)
    R = MarkovOperator(space, r, substochastic=True)
    return Decomposition(Q, R, float(C), float(1.0 - r.sum(axis=1).max()))


def quasi_compact_bound(m: int, eta: float) -> float:
    """``(m + 2) * (1 - eta) ** m``: distance from ``P_w`` to a compact operator.

    Valid for words of ``m + 1`` blocks whose kernels each split with a
    remainder of norm at most ``1 - eta``. Values of 2 or more carry no
    information, since any two Markov operators are within 2.
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    if not 0 < eta <= 1:
        raise ValueError("eta must lie in (0, 1]")
    return float((m + 2) * (1.0 - eta) ** m)


@dataclass(frozen=True)
class QuasiCompactCertificate:
    """``||P_w - Q_w||_1 <= 1 - delta`` with ``Q_w`` compact, for all ``|w| = r``.

    ``eta`` is the worst Condition D constant over words of length
    ``n_compose``; ``m`` is the smallest block count exponent with
    ``quasi_compact_bound(m, eta) < 1``, and ``r = n_compose * (m + 1)``.
    """

    n_compose: int
    theta: float
    eta: float
    worst_word: str
    max_density: float
    m: int
    r: int
    delta: float
    max_residual_mass: float


def first_contracting_m(eta: float, m_cap: int = 10**6) -> int:
    """Smallest ``m >= 1`` with ``quasi_compact_bound(m, eta) < 1``."""
    m = 1
    while quasi_compact_bound(m, eta) >= 1.0:
        m += 1
        if m > m_cap:
            raise ValueError("eta too small for a useful bound")
    return m


def certify_quasi_compact(
    T: MarkovSystem,
    mu=None,
    n_compose: int = 1,
    theta: float = 0.5,
    *,
    budget: int | None = WORD_BUDGET,
    mode: str = "auto",
) -> QuasiCompactCertificate:
    """Certify quasi-compactness from Condition D on all words of length ``n_compose``.

    Each word kernel must have a bounded density with respect to ``mu``
    (uniform by default) and a positive Condition D constant at ``theta``.

    Raises
    ------
    NotCertifiedError
        Naming the first word with unbounded density or ``eta == 0``.
    """
    if n_compose < 1:
        raise ValueError("n_compose must be at least 1")
    check_budget(len(T.alphabet) ** n_compose, budget)
    m_ref = _mass(mu, T.n)
    kernels = level_kernels(T, n_compose, budget=None)
    worst_eta, worst_word, max_k, max_resid = math.inf, "", 0.0, 0.0
    C = 1.0 / (1.0 - theta) if theta < 1 else math.inf
    for w, k in zip(iter_words(T.alphabet, n_compose), kernels):
        K = bounded_density(k, m_ref)
        if not math.isfinite(K):
            raise NotCertifiedError(
                f"word {w!r} has unbounded density", witness=w, value=K, r=n_compose
            )
        eta = max(condition_d_check(k, m_ref, theta, mode=mode), 1.0 - K * (1.0 - theta))
        if eta <= 0:
            raise NotCertifiedError(
                f"word {w!r} fails Condition D at theta={theta} (density ratio {K:.6g})",
                witness=w,
                value=K,
                r=n_compose,
            )
        resid = float(np.clip(k - C * m_ref[None, :], 0.0, None).sum(axis=1).max())
        max_k = max(max_k, K)
        max_resid = max(max_resid, resid)
        if eta < worst_eta:
            worst_eta, worst_word = eta, w
    worst_eta = min(worst_eta, 1.0)
    m = first_contracting_m(worst_eta)
    bound = quasi_compact_bound(m, worst_eta)
    return QuasiCompactCertificate(
        n_compose=n_compose,
        theta=float(theta),
        eta=float(worst_eta),
        worst_word=worst_word,
        max_density=float(max_k),
        m=m,
        r=n_compose * (m + 1),
        delta=float(1.0 - bound),
        max_residual_mass=max_resid,
    )
