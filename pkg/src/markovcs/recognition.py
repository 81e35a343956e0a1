"""Cut-point recognizers and the brute-force enumeration oracle.

A recognizer accepts a distribution ``mu`` when ``mu(F) >= cut + isolation``
and rejects it when ``mu(F) <= cut - isolation``. Any accepted and any
rejected distribution are then at least ``4 * isolation`` apart in the L1
norm, which is the gap the extraction procedures rely on.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator

import numpy as np

from .errors import NotARecognizerError
from .measures import (
    WORD_BUDGET,
    MarkovSystem,
    SignedMeasure,
    check_budget,
    count_words,
    iter_orbit,
    iter_words,
)

EXACT_MAX_N = 8
EXACT_MAX_LEN = 12


class Verdict(str, enum.Enum):
    ACCEPT = "Accept"
    REJECT = "Reject"
    UNDECIDED = "Undecided"

    def __str__(self):
        return self.value


def _to_fraction(x) -> Fraction:
    # floats are read through their shortest decimal repr, so 0.05 means 1/20
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


@dataclass(frozen=True)
class Recognizer:
    """Isolated cut-point acceptance on the cell set ``accepting``."""

    accepting: tuple
    cut: Fraction
    isolation: Fraction

    def __post_init__(self):
        object.__setattr__(self, "accepting", tuple(sorted(set(int(i) for i in self.accepting))))
        cut, iso = _to_fraction(self.cut), _to_fraction(self.isolation)
        object.__setattr__(self, "cut", cut)
        object.__setattr__(self, "isolation", iso)
        if iso <= 0:
            raise ValueError("isolation must be positive")
        if not 0 < cut < 1:
            raise ValueError("cut must lie in (0, 1)")
        if cut - iso < 0 or cut + iso > 1:
            raise ValueError("cut +/- isolation must stay inside [0, 1]")

    @property
    def gap(self) -> float:
        return induced_gap(self)

    def margin(self, mass: np.ndarray) -> np.ndarray | float:
        """``mu(F) - cut`` for one distribution or a stack of them."""
        mass = np.asarray(mass)
        idx = list(self.accepting)
        return mass[..., idx].sum(axis=-1) - float(self.cut)

    def verdicts(self, margins) -> np.ndarray:
        """Vectorized verdict codes: 1 accept, -1 reject, 0 undecided."""
        iso = float(self.isolation)
        margins = np.asarray(margins, dtype=float)
        return np.where(margins >= iso, 1, np.where(margins <= -iso, -1, 0))

    def exact_margin(self, mass) -> Fraction:
        return sum((mass[i] for i in self.accepting), Fraction(0)) - self.cut

    def verdict_for_margin(self, margin) -> Verdict:
        iso = self.isolation if isinstance(margin, Fraction) else float(self.isolation)
        if margin >= iso:
            return Verdict.ACCEPT
        if margin <= -iso:
            return Verdict.REJECT
        return Verdict.UNDECIDED


@dataclass(frozen=True)
class PredicateRecognizer:
    """Arbitrary accept/reject predicates with a user-declared gap ``rho``.

    The gap is trusted, not checked; reports carry it as declared.
    """

    accept: Callable[[np.ndarray], bool]
    reject: Callable[[np.ndarray], bool]
    rho: float

    @property
    def gap(self) -> float:
        return float(self.rho)

    def classify_mass(self, mass) -> Verdict:
        a, r = bool(self.accept(mass)), bool(self.reject(mass))
        if a and r:
            raise ValueError("accept and reject predicates overlap")
        if a:
            return Verdict.ACCEPT
        if r:
            return Verdict.REJECT
        return Verdict.UNDECIDED


@dataclass(frozen=True)
class Classification:
    word: str | None
    verdict: Verdict
    margin: float | Fraction | None


def classify(rec, mu, word: str | None = None) -> Classification:
    """Classify one probability distribution."""
    mass = mu.mass if isinstance(mu, SignedMeasure) else np.asarray(mu, dtype=float)
    if isinstance(rec, PredicateRecognizer):
        return Classification(word, rec.classify_mass(mass), None)
    m = float(rec.margin(mass))
    return Classification(word, rec.verdict_for_margin(m), m)


def induced_gap(rec: Recognizer) -> float:
    """L1 distance separating every accepted from every rejected distribution.

    ``|mu(F) - nu(F)| >= 2 * isolation`` forces ``||mu - nu||_1 >= 4 * isolation``,
    and the bound is attained.
    """
    if isinstance(rec, PredicateRecognizer):
        return rec.gap
    return float(4 * rec.isolation)


@dataclass(frozen=True, eq=False)
class MCS:
    """A Markov system together with a recognizer."""

    system: MarkovSystem
    recognizer: Recognizer

    def __post_init__(self):
        if isinstance(self.recognizer, Recognizer):
            bad = [i for i in self.recognizer.accepting if not 0 <= i < self.system.n]
            if bad:
                raise ValueError(f"accepting cells {bad} out of range")

    @property
    def alphabet(self) -> str:
        return self.system.alphabet

    @property
    def gap(self) -> float:
        return induced_gap(self.recognizer)

    def with_system(self, system: MarkovSystem) -> MCS:
        return MCS(system, self.recognizer)


_CODE = {1: Verdict.ACCEPT, -1: Verdict.REJECT, 0: Verdict.UNDECIDED}


@dataclass(frozen=True, eq=False)
class OracleResult:
    """Verdict and margin for every word up to ``max_len``, in shortlex order."""

    max_len: int
    exact: bool
    verdicts: dict = field(repr=False)
    margins: dict = field(repr=False)

    def __len__(self):
        return len(self.verdicts)

    def __getitem__(self, word: str) -> Verdict:
        return self.verdicts[word]

    def __iter__(self) -> Iterator[str]:
        return iter(self.verdicts)

    def items(self):
        return self.verdicts.items()

    def undecided(self) -> list[str]:
        return [w for w, v in self.verdicts.items() if v is Verdict.UNDECIDED]


def _float_oracle(M: MCS, max_len: int, budget):
    rec = M.recognizer
    verdicts, margins = {}, {}
    for length, dists in iter_orbit(M.system, max_len, budget=budget):
        words = iter_words(M.alphabet, length)
        if isinstance(rec, PredicateRecognizer):
            for w, d in zip(words, dists):
                verdicts[w] = rec.classify_mass(d)
                margins[w] = None
            continue
        m = rec.margin(dists)
        codes = rec.verdicts(m)
        for w, c, mm in zip(words, codes.tolist(), m.tolist()):
            verdicts[w] = _CODE[c]
            margins[w] = mm
    return verdicts, margins


def _exact_oracle(M: MCS, max_len: int):
    T, rec = M.system, M.recognizer
    if not T.has_exact:
        raise ValueError("exact mode needs rational kernels and initial distribution")
    if not isinstance(rec, Recognizer):
        raise ValueError("exact mode needs a cut-point recognizer")
    n = T.n
    kernels = [[list(row) for row in T.operators[a].exact] for a in T.alphabet]
    verdicts, margins = {}, {}
    level = [("", list(T.initial.exact))]
    for length in range(max_len + 1):
        nxt = []
        for w, mass in level:
            m = rec.exact_margin(mass)
            verdicts[w] = rec.verdict_for_margin(m)
            margins[w] = m
            if length < max_len:
                for a, k in zip(T.alphabet, kernels):
                    out = [Fraction(0)] * n
                    for x, mx in enumerate(mass):
                        if mx:
                            row = k[x]
                            for y in range(n):
                                if row[y]:
                                    out[y] += mx * row[y]
                    nxt.append((w + a, out))
        level = nxt
    return verdicts, margins


def enumerate_classify(
    M: MCS,
    max_len: int,
    *,
    exact: bool = False,
    strict: bool = True,
    budget: int | None = WORD_BUDGET,
    exact_max_n: int = EXACT_MAX_N,
    exact_max_len: int = EXACT_MAX_LEN,
) -> OracleResult:
    """Classify every word of length ``<= max_len`` by direct composition from ``mu_0``.

    With ``exact=True`` all arithmetic uses :class:`fractions.Fraction` on the
    rational kernel entries. With ``strict=True`` (the default) an undecided
    word raises :class:`NotARecognizerError` naming the shortlex-first witness.
    """
    if max_len < 0:
        raise ValueError("max_len must be nonnegative")
    check_budget(count_words(len(M.alphabet), max_len), budget)
    if exact:
        if M.system.n > exact_max_n or max_len > exact_max_len:
            raise ValueError(
                f"exact oracle limited to n <= {exact_max_n}, max_len <= {exact_max_len}"
            )
        verdicts, margins = _exact_oracle(M, max_len)
    else:
        verdicts, margins = _float_oracle(M, max_len, budget=None)
    result = OracleResult(max_len, exact, verdicts, margins)
    if strict:
        und = result.undecided()
        if und:
            raise NotARecognizerError(und[0], margins[und[0]])
    return result


@dataclass(frozen=True)
class RecognizerReport:
    max_len: int
    n_words: int
    min_slack: float
    tightest_word: str


def min_slack(M: MCS, result: OracleResult) -> tuple[float, str]:
    """Smallest ``|margin| - isolation`` over the oracle's words."""
    iso = M.recognizer.isolation
    best, where = None, ""
    for w, m in result.margins.items():
        s = abs(m) - (iso if isinstance(m, Fraction) else float(iso))
        if best is None or s < best:
            best, where = s, w
    return float(best), where


def validate_recognizer(M: MCS, max_len: int, **kw) -> RecognizerReport:
    """Run the oracle and report the empirical isolation slack.

    Raises :class:`NotARecognizerError` if any word is undecided.
    """
    result = enumerate_classify(M, max_len, strict=True, **kw)
    slack, word = min_slack(M, result)
    return RecognizerReport(max_len, len(result), slack, word)


def _format_margin(m) -> str:
    if m is None:
        return "nan"
    if isinstance(m, Fraction):
        return f"{m.numerator}/{m.denominator}"
    return repr(float(m))


def format_oracle(result: OracleResult) -> str:
    """One ``<word> <verdict> <margin>`` line per word; the empty word prints as ``ε``."""
    lines = [
        f"{w or 'ε'} {v.value} {_format_margin(result.margins[w])}"
        for w, v in result.verdicts.items()
    ]
    return "\n".join(lines) + "\n"


def parse_oracle(text: str) -> dict:
    """Inverse of :func:`format_oracle` for the verdict column."""
    out = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        w, v, _ = line.split(" ")
        out["" if w == "ε" else w] = Verdict(v)
    return out
