"""Finite state spaces, signed measures, Markov operators and word composition.

Measures are row vectors over the cells of a :class:`StateSpace`; a Markov
operator is a row-stochastic kernel ``K`` with ``K[x, y]`` the probability of
moving from cell ``x`` to cell ``y``. Applying an operator to a measure is the
vector-matrix product ``m @ K``.

Words are strings of single-character symbols and the first letter acts
first, so the kernel of ``"ab"`` is ``K_a @ K_b``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    BudgetExceededError,
    InvalidKernelError,
    SpaceMismatchError,
    UnknownSymbolError,
)

STOCHASTIC_TOL = 1e-9
WORD_BUDGET = 10**6


@dataclass(frozen=True)
class StateSpace:
    """An ordered, finite set of cells.

    ``intervals`` is present only for discretized continuous spaces and gives
    the half-open interval ``[a_i, b_i)`` covered by each cell.
    """

    labels: tuple
    intervals: tuple | None = None

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if len(labels) < 1:
            raise ValueError("a state space needs at least one cell")
        if len(set(labels)) != len(labels):
            raise ValueError("cell labels must be unique")
        if self.intervals is not None:
            iv = tuple((float(a), float(b)) for a, b in self.intervals)
            if len(iv) != len(labels):
                raise ValueError("one interval per cell required")
            for (a, b), (c, _) in zip(iv, iv[1:]):
                if not a < b <= c:
                    raise ValueError("cell intervals must be disjoint and ordered")
            if not iv[-1][0] < iv[-1][1]:
                raise ValueError("cell intervals must be non-empty")
            object.__setattr__(self, "intervals", iv)

    @classmethod
    def of_size(cls, n: int) -> StateSpace:
        return cls(tuple(range(n)))

    @classmethod
    def uniform_grid(cls, a: float, b: float, n: int) -> StateSpace:
        edges = np.linspace(a, b, n + 1)
        return cls(tuple(range(n)), tuple(zip(edges[:-1], edges[1:])))

    @property
    def n(self) -> int:
        return len(self.labels)

    def __len__(self):
        return len(self.labels)

    @cached_property
    def centers(self) -> np.ndarray:
        if self.intervals is None:
            raise ValueError("state space has no geometry")
        iv = np.asarray(self.intervals)
        return 0.5 * (iv[:, 0] + iv[:, 1])


def _frozen_array(values, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("entries must be finite")
    arr.setflags(write=False)
    return arr


def _as_fraction_array(values) -> np.ndarray:
    arr = np.array(values, dtype=object)
    return np.vectorize(Fraction, otypes=[object])(arr)


@dataclass(frozen=True, eq=False)
class SignedMeasure:
    """A charge on each cell of ``space``.

    ``exact`` optionally carries the same masses as :class:`fractions.Fraction`
    objects; only the rational oracle reads it.
    """

    space: StateSpace
    mass: np.ndarray
    exact: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "mass", _frozen_array(self.mass, 1))
        if self.mass.shape[0] != self.space.n:
            raise SpaceMismatchError(
                f"measure has {self.mass.shape[0]} cells, space has {self.space.n}"
            )
        if self.exact is not None:
            ex = _as_fraction_array(self.exact)
            if ex.shape != self.mass.shape:
                raise ValueError("exact masses must match the float masses")
            ex.setflags(write=False)
            object.__setattr__(self, "exact", ex)

    @classmethod
    def point_mass(cls, space: StateSpace, cell: int) -> SignedMeasure:
        exact = [Fraction(0)] * space.n
        exact[cell] = Fraction(1)
        return cls(space, np.array([float(v) for v in exact]), exact)

    @classmethod
    def uniform(cls, space: StateSpace) -> SignedMeasure:
        exact = [Fraction(1, space.n)] * space.n
        return cls(space, np.full(space.n, 1.0 / space.n), exact)

    @classmethod
    def from_rational(cls, space: StateSpace, values: Sequence) -> SignedMeasure:
        exact = [Fraction(v) for v in values]
        return cls(space, np.array([float(v) for v in exact]), exact)

    @property
    def total_charge(self) -> float:
        return float(self.mass.sum())

    def is_probability(self, tol: float = STOCHASTIC_TOL) -> bool:
        return bool(np.all(self.mass >= -tol) and abs(self.total_charge - 1.0) <= tol)

    def is_zero_charge(self, tol: float = STOCHASTIC_TOL) -> bool:
        return abs(self.total_charge) <= tol

    def __sub__(self, other: SignedMeasure) -> SignedMeasure:
        _check_space(self.space, other.space)
        return SignedMeasure(self.space, self.mass - other.mass)

    def __add__(self, other: SignedMeasure) -> SignedMeasure:
        _check_space(self.space, other.space)
        return SignedMeasure(self.space, self.mass + other.mass)


def _check_space(a: StateSpace, b: StateSpace):
    if a is not b and a != b:
        raise SpaceMismatchError("operands live on different state spaces")


@dataclass(frozen=True)
class RowDefect:
    row: int
    kind: str  # "negative" or "row_sum"
    amount: float


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    defects: tuple = ()

    def __str__(self):
        if self.valid:
            return "valid"
        parts = [f"row {d.row}: {d.kind} defect {d.amount:.3g}" for d in self.defects]
        return "invalid kernel: " + "; ".join(parts)


def _kernel_report(kernel: np.ndarray, tol: float, substochastic: bool) -> ValidationReport:
    defects = []
    for x, row in enumerate(kernel):
        low = row.min()
        if low < -tol:
            defects.append(RowDefect(x, "negative", float(-low)))
        s = row.sum()
        excess = s - 1.0 if substochastic else abs(s - 1.0)
        if excess > tol:
            defects.append(RowDefect(x, "row_sum", float(abs(s - 1.0))))
    return ValidationReport(not defects, tuple(defects))


@dataclass(frozen=True, eq=False)
class MarkovOperator:
    """A row-stochastic kernel on ``space``.

    With ``substochastic=True`` rows may sum to less than one; this is used for
    the parts of an operator decomposition. Construction validates the kernel
    against ``tol`` and raises :class:`InvalidKernelError` on failure.
    """

    space: StateSpace
    kernel: np.ndarray
    exact: np.ndarray | None = field(default=None, repr=False)
    substochastic: bool = False
    tol: float = field(default=STOCHASTIC_TOL, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "kernel", _frozen_array(self.kernel, 2))
        n = self.space.n
        if self.kernel.shape != (n, n):
            raise SpaceMismatchError(
                f"kernel shape {self.kernel.shape} does not match {n} cells"
            )
        if self.exact is not None:
            ex = _as_fraction_array(self.exact)
            if ex.shape != (n, n):
                raise ValueError("exact kernel must match the float kernel")
            ex.setflags(write=False)
            object.__setattr__(self, "exact", ex)
        report = _kernel_report(self.kernel, self.tol, self.substochastic)
        if not report.valid:
            raise InvalidKernelError(report)

    @classmethod
    def identity(cls, space: StateSpace) -> MarkovOperator:
        exact = np.full((space.n, space.n), Fraction(0), dtype=object)
        for i in range(space.n):
            exact[i, i] = Fraction(1)
        return cls(space, np.eye(space.n), exact)

    @classmethod
    def constant(cls, space: StateSpace, phi) -> MarkovOperator:
        """Operator whose every row is the probability vector ``phi``."""
        phi = phi.mass if isinstance(phi, SignedMeasure) else np.asarray(phi, float)
        return cls(space, np.tile(phi, (space.n, 1)))

    @classmethod
    def from_rational(cls, space: StateSpace, rows) -> MarkovOperator:
        exact = _as_fraction_array(rows)
        return cls(space, exact.astype(float), exact)

    @property
    def n(self) -> int:
        return self.space.n


def tv_norm(m: SignedMeasure | np.ndarray) -> float:
    """Total variation norm ``sup_A m(A) - inf_A m(A)``, i.e. the sum of |mass|."""
    mass = m.mass if isinstance(m, SignedMeasure) else np.asarray(m)
    return float(np.abs(mass).sum())


def apply(P: MarkovOperator, m: SignedMeasure) -> SignedMeasure:
    """Push ``m`` forward through ``P``: ``(Pm)[y] = sum_x m[x] P[x, y]``."""
    _check_space(P.space, m.space)
    exact = None
    if P.exact is not None and m.exact is not None:
        exact = m.exact @ P.exact
    return SignedMeasure(m.space, m.mass @ P.kernel, exact)


def compose(first: MarkovOperator, then: MarkovOperator) -> MarkovOperator:
    """Operator that applies ``first`` and then ``then``."""
    _check_space(first.space, then.space)
    exact = None
    if first.exact is not None and then.exact is not None:
        exact = first.exact @ then.exact
    return MarkovOperator(
        first.space,
        first.kernel @ then.kernel,
        exact,
        substochastic=first.substochastic or then.substochastic,
    )


def operator_distance(P, Q) -> float:
    """Induced norm of ``P - Q`` on signed measures: the max row L1 distance."""
    a = P.kernel if isinstance(P, MarkovOperator) else np.asarray(P)
    b = Q.kernel if isinstance(Q, MarkovOperator) else np.asarray(Q)
    return float(np.abs(a - b).sum(axis=-1).max(axis=-1))


def validate_markov(P: MarkovOperator | np.ndarray, tol: float = STOCHASTIC_TOL) -> ValidationReport:
    """List rows with negative entries or row sums off by more than ``tol``.

    Accepts a raw array as well, since an invalid kernel cannot be wrapped in
    a :class:`MarkovOperator`.
    """
    kernel = P.kernel if isinstance(P, MarkovOperator) else np.asarray(P, dtype=float)
    return _kernel_report(kernel, tol, substochastic=False)


@dataclass(frozen=True, eq=False)
class MarkovSystem:
    """Alphabet, one operator per symbol, and an initial distribution.

    ``metadata`` holds construction details (e.g. the density bound of a
    discretized kernel) and does not take part in any computation.
    """

    alphabet: str
    operators: Mapping[str, MarkovOperator]
    initial: SignedMeasure
    metadata: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        alphabet = "".join(self.alphabet)
        if not alphabet:
            raise ValueError("alphabet must be non-empty")
        if len(set(alphabet)) != len(alphabet):
            raise ValueError("alphabet symbols must be unique")
        object.__setattr__(self, "alphabet", alphabet)
        ops = dict(self.operators)
        if set(ops) != set(alphabet):
            raise ValueError("exactly one operator per symbol required")
        space = ops[alphabet[0]].space
        for op in ops.values():
            _check_space(space, op.space)
            if op.substochastic:
                raise ValueError("system operators must be stochastic")
        _check_space(space, self.initial.space)
        if not self.initial.is_probability():
            raise ValueError("initial distribution must be a probability measure")
        object.__setattr__(self, "operators", {a: ops[a] for a in alphabet})

    @property
    def space(self) -> StateSpace:
        return self.initial.space

    @property
    def n(self) -> int:
        return self.space.n

    @cached_property
    def kernels(self) -> np.ndarray:
        """Stacked kernels, shape ``(len(alphabet), n, n)``, in alphabet order."""
        k = np.stack([self.operators[a].kernel for a in self.alphabet])
        k.setflags(write=False)
        return k

    @property
    def has_exact(self) -> bool:
        return self.initial.exact is not None and all(
            op.exact is not None for op in self.operators.values()
        )

    def replace_operators(self, operators: Mapping[str, MarkovOperator]) -> MarkovSystem:
        return MarkovSystem(self.alphabet, operators, self.initial)


def check_word(alphabet: str, w: str):
    for s in w:
        if s not in alphabet:
            raise UnknownSymbolError(s, alphabet)


def compose_word(T: MarkovSystem, w: str) -> MarkovOperator:
    """Kernel of the word ``w``; the first letter acts first."""
    check_word(T.alphabet, w)
    result = MarkovOperator.identity(T.space)
    for s in w:
        result = compose(result, T.operators[s])
    return result


def word_distribution(T: MarkovSystem, w: str) -> SignedMeasure:
    """``P_w mu_0``, computed letter by letter."""
    check_word(T.alphabet, w)
    m = T.initial
    for s in w:
        m = apply(T.operators[s], m)
    return m


def iter_words(alphabet: str, length: int) -> Iterator[str]:
    """All words of exactly ``length`` letters in lexicographic (alphabet) order."""
    for t in itertools.product(alphabet, repeat=length):
        yield "".join(t)


def word_at(alphabet: str, length: int, index: int) -> str:
    """The ``index``-th word of :func:`iter_words` (base-``len(alphabet)`` digits)."""
    k = len(alphabet)
    out = []
    for _ in range(length):
        index, d = divmod(index, k)
        out.append(alphabet[d])
    return "".join(reversed(out))


def count_words(k: int, max_len: int) -> int:
    """Number of words of length at most ``max_len`` over ``k`` symbols."""
    return sum(k**i for i in range(max_len + 1))


def check_budget(n_words: int, budget: int | None, what: str = "words"):
    if budget is not None and n_words > budget:
        raise BudgetExceededError(f"{n_words} {what} exceed the budget of {budget}")


def level_kernels(T: MarkovSystem, length: int, budget: int | None = WORD_BUDGET):
    """Kernels of all words of one length, shape ``(k**length, n, n)``.

    Row ``i`` belongs to the ``i``-th word of :func:`iter_words`.
    """
    check_budget(len(T.alphabet) ** length, budget)
    k, n = len(T.alphabet), T.n
    out = np.eye(n)[None]
    for _ in range(length):
        out = np.matmul(out[:, None], T.kernels[None]).reshape(-1, n, n)
    return out


def iter_level_kernels(T: MarkovSystem, max_len: int, budget: int | None = WORD_BUDGET):
    """Yield ``(length, kernels)`` for lengths ``0..max_len``."""
    check_budget(count_words(len(T.alphabet), max_len), budget)
    n = T.n
    cur = np.eye(n)[None]
    yield 0, cur
    for length in range(1, max_len + 1):
        cur = np.matmul(cur[:, None], T.kernels[None]).reshape(-1, n, n)
        yield length, cur


def iter_orbit(T: MarkovSystem, max_len: int, budget: int | None = WORD_BUDGET):
    """Yield ``(length, distributions)`` with ``distributions[i] = P_w mu_0``.

    ``w`` runs over :func:`iter_words` of that length.
    """
    check_budget(count_words(len(T.alphabet), max_len), budget)
    cur = T.initial.mass[None]
    yield 0, cur
    for length in range(1, max_len + 1):
        cur = np.einsum("wx,axy->way", cur, T.kernels).reshape(-1, T.n)
        yield length, cur
