"""Dobrushin coefficients, strong Doeblin (D0) certificates and weak ergodicity."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MCSError
from .measures import (
    WORD_BUDGET,
    MarkovOperator,
    MarkovSystem,
    SignedMeasure,
    check_budget,
    count_words,
    iter_level_kernels,
    iter_words,
)


class NotCertifiedError(MCSError):
    """A certification search ended without success.

    ``witness`` is the word attaining the worst value at the last length tried.
    """

    def __init__(self, message, witness, value, r):
        self.witness = witness
        self.value = value
        self.r = r
        super().__init__(message)


def _kernel_of(P) -> np.ndarray:
    return P.kernel if isinstance(P, MarkovOperator) else np.asarray(P, dtype=float)


def _row_pair_tv(k: np.ndarray) -> np.ndarray:
    """Half L1 distance between every pair of rows, batched over leading axes."""
    return 0.5 * np.abs(k[..., :, None, :] - k[..., None, :, :]).sum(axis=-1)


def dobrushin(P) -> float:
    """Dobrushin ergodicity coefficient of a Markov kernel.

    The supremum of ``0.5 * ||P mu - P nu||_1`` over probability measures is
    attained at point masses, so this is the largest half L1 distance between
    two rows of the kernel.

    Examples
    --------
    >>> import numpy as np
    >>> dobrushin(np.array([[0, .5, .5], [.5, 0, .5], [.5, .5, 0]]))
    0.5
    """
    return float(_row_pair_tv(_kernel_of(P)).max())


def dobrushin_pair(P) -> tuple[float, int, int]:
    """Dobrushin coefficient together with a maximizing pair of rows."""
    tv = _row_pair_tv(_kernel_of(P))
    x, y = np.unravel_index(int(np.argmax(tv)), tv.shape)
    return float(tv[x, y]), int(x), int(y)


def dobrushin_batch(kernels: np.ndarray, chunk_bytes: int = 2**26) -> np.ndarray:
    """Dobrushin coefficients of a stack of kernels, shape ``(B, n, n)``."""
    kernels = np.asarray(kernels, dtype=float)
    b, n = kernels.shape[0], kernels.shape[-1]
    step = max(1, chunk_bytes // (8 * n**3))
    out = np.empty(b)
    for i in range(0, b, step):
        out[i : i + step] = _row_pair_tv(kernels[i : i + step]).max(axis=(-1, -2))
    return out


def dobrushin_nullspace_check(P, samples: int, seed=0) -> float:
    """Largest ``||lam P||_1 / ||lam||_1`` over random zero-charge measures ``lam``.

    Every ratio is bounded by :func:`dobrushin`; the return value is the
    empirical maximum.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    k = _kernel_of(P)
    rng = np.random.default_rng(seed)
    lam = rng.standard_normal((samples, k.shape[0]))
    # sparse draws reach the extreme (two-point) directions more often
    mask = rng.random(lam.shape) < 0.5
    lam = np.where(mask, lam, 0.0)
    lam -= lam.mean(axis=1, keepdims=True)
    norms = np.abs(lam).sum(axis=1)
    keep = norms > 0
    if not keep.any():
        return 0.0
    ratios = np.abs(lam[keep] @ k).sum(axis=1) / norms[keep]
    return float(ratios.max())


@dataclass(frozen=True)
class D0Certificate:
    """Largest ``c`` with ``P(x, .) >= c * phi`` for every row ``x``."""

    c_star: float
    phi: SignedMeasure | np.ndarray | None

    @property
    def holds(self) -> bool:
        return self.c_star > 0


def d0_certificate(P) -> D0Certificate:
    """Strong Doeblin constant from the column minima of the kernel.

    ``c_star = sum_y min_x P[x, y]``; when positive, ``phi`` is the normalized
    vector of column minima and ``dobrushin(P) <= 1 - c_star``.
    """
    k = _kernel_of(P)
    col_min = np.clip(k.min(axis=0), 0.0, None)
    c_star = float(col_min.sum())
    if c_star <= 0.0:
        return D0Certificate(0.0, None)
    phi = col_min / c_star
    if isinstance(P, MarkovOperator):
        phi = SignedMeasure(P.space, phi)
    return D0Certificate(min(c_star, 1.0), phi)


@dataclass(frozen=True)
class ErgodicityCertificate:
    """Block length ``r`` with ``max_{|w| = r} dobrushin(P_w) = delta_bar < 1``."""

    r: int
    delta_bar: float
    witness: str = ""
    per_word: dict | None = field(default=None, repr=False)


def certify_weak_ergodicity(
    T: MarkovSystem,
    r_max: int,
    *,
    budget: int | None = WORD_BUDGET,
    keep_per_word: bool = False,
    tol: float = 1e-12,
) -> ErgodicityCertificate:
    """Smallest ``r <= r_max`` whose words all have Dobrushin coefficient below one.

    Every word of each length is enumerated, because weak ergodicity can hold
    at ``r`` even when each single letter has coefficient one. ``tol`` guards
    against coefficients that differ from one only by rounding.

    Raises
    ------
    NotCertifiedError
        If no ``r <= r_max`` works; ``witness`` maximizes the coefficient at
        ``r_max``.
    BudgetExceededError
        If ``|alphabet|**1 + ... + |alphabet|**r_max`` exceeds ``budget``.
    """
    if r_max < 1:
        raise ValueError("r_max must be at least 1")
    check_budget(count_words(len(T.alphabet), r_max), budget)
    worst = None
    for r, kernels in iter_level_kernels(T, r_max, budget=None):
        if r == 0:
            continue
        deltas = dobrushin_batch(kernels)
        i = int(np.argmax(deltas))
        words = list(iter_words(T.alphabet, r))
        worst = (words[i], float(deltas[i]))
        if deltas[i] < 1.0 - tol:
            per_word = dict(zip(words, deltas.tolist())) if keep_per_word else None
            return ErgodicityCertificate(r, float(deltas[i]), words[i], per_word)
    raise NotCertifiedError(
        f"no r <= {r_max} with all Dobrushin coefficients below 1; "
        f"worst word {worst[0]!r} has {worst[1]:.6g}",
        witness=worst[0],
        value=worst[1],
        r=r_max,
    )


def decay_bound(cert: ErgodicityCertificate, n: int) -> float:
    """Upper bound on ``dobrushin(P_w)`` for every word of length ``n``.

    Splits ``w`` into ``n // r`` full blocks plus a remainder; the coefficient
    is submultiplicative and at most one on the remainder.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    return float(cert.delta_bar ** (n // cert.r))
