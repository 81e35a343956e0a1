"""Acceptance harness: one pass/fail line per criterion.

Run under pytest (lines appear in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""

import io as stdio
import itertools
import sys
import tempfile
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from helpers import ACCEPTANCE_LINES, dfa_shortlex_accepts, stochastic

from markovcs import io
from markovcs.cli import run
from markovcs.dfa import dfa_equiv, is_isomorphic, minimize_dfa
from markovcs.doeblin import quasi_compact_bound, yosida_decompose
from markovcs.ergodicity import (
    NotCertifiedError,
    certify_weak_ergodicity,
    d0_certificate,
    decay_bound,
    dobrushin,
    dobrushin_batch,
    dobrushin_nullspace_check,
)
from markovcs.extraction import definite_language_table, definite_order, extract_dfa, operator_cover, orbit_cover
from markovcs.measures import (
    MarkovOperator,
    MarkovSystem,
    SignedMeasure,
    StateSpace,
    iter_level_kernels,
    iter_words,
    operator_distance,
    tv_norm,
    word_distribution,
)
from markovcs.recognition import Verdict, classify, enumerate_classify
from markovcs.stability import collapse_perturbation, perturb, stability_margin, verify_stability
from markovcs.systems import (
    contains_ab_dfa,
    contains_ab_redundant_dfa,
    embed_dfa,
    ends_in_a_dfa,
    even_parity_dfa,
    gaussian_two_map,
    random_weakly_ergodic,
)

HORIZON = 12
CHECKS = {}


def criterion(number, title, seconds=None):
    def register(fn):
        CHECKS[number] = (title, seconds, fn)
        return fn
    return register


def weakly_ergodic_systems():
    return [
        ("random seed 0", random_weakly_ergodic(0)),
        ("bundled weakly_ergodic", io.load_bundled("weakly_ergodic").mcs),
        ("random seed 9, three letters",
         random_weakly_ergodic(9, n=3, alphabet="abc", noise=Fraction(3, 5), probe_len=5)),
    ]


def oracle_mismatches(dfa, M, max_len):
    result = enumerate_classify(M, max_len)
    truth = np.array([v is Verdict.ACCEPT for v in result.verdicts.values()])
    return int(np.sum(dfa_shortlex_accepts(dfa, max_len) != truth)), len(result)


@criterion(1, "three-cell example: delta = 1/2, c_star = 0", seconds=1.0)
def check_three_cell():
    P = io.load_bundled("three_state").system.operators["a"]
    d, c = dobrushin(P), d0_certificate(P).c_star
    return abs(d - 0.5) <= 1e-12 and c == 0, f"delta={d!r} c_star={c!r}"


@criterion(2, "norm and coefficient identities on 1000 random systems", seconds=60.0)
def check_identities():
    rng = np.random.default_rng(2024)
    failures = {k: 0 for k in ("contraction", "submult", "difference_contraction", "perturbed_coefficient", "d0", "nullspace")}
    for _ in range(1000):
        n, k = int(rng.integers(1, 9)), int(rng.integers(1, 4))
        sparsity = rng.choice([0.0, 0.5])
        letters = [stochastic(rng, n, sparsity=sparsity) for _ in range(k)]
        P, Q, R = (letters[int(rng.integers(k))] for _ in range(3))
        Pt = np.abs(P + rng.normal(scale=0.05, size=P.shape))
        Pt /= Pt.sum(axis=1, keepdims=True)
        m = rng.normal(size=n)
        dP = dobrushin(P)
        failures["contraction"] += tv_norm(m @ P) > tv_norm(m) + 1e-12
        failures["submult"] += dobrushin(Q @ P) > dobrushin(Q) * dP + 1e-9
        # row-vector convention: Q @ P applies Q first, then P
        failures["difference_contraction"] += operator_distance(Q @ P, R @ P) > dP * operator_distance(Q, R) + 1e-9
        failures["perturbed_coefficient"] += dobrushin(Pt) > dP + operator_distance(P, Pt) + 1e-9
        failures["d0"] += dP > 1 - d0_certificate(P).c_star + 1e-12
        failures["nullspace"] += dobrushin_nullspace_check(P, 50, seed=int(rng.integers(2**31))) > dP + 1e-12
    bad = {k: int(v) for k, v in failures.items() if v}
    return not bad, f"violations={bad or 'none'}"


@criterion(3, "tv_norm equals exhaustive sup minus inf over subsets")
def check_tv_norm():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 13))
        m = rng.normal(size=n) * rng.choice([0.1, 1.0, 10.0])
        subsets = np.array(list(itertools.product([0, 1], repeat=n)), dtype=float)
        values = subsets @ m
        worst = max(worst, abs(tv_norm(m) - (values.max() - values.min())))
    return worst <= 1e-12, f"max deviation={worst:.3g}"


@criterion(4, "Rabin extraction agrees with the oracle to length 12", seconds=120.0)
def check_rabin():
    details, ok = [], True
    for name, source, minimal in [("ends in a", ends_in_a_dfa(), ends_in_a_dfa()),
                                  ("even parity", even_parity_dfa(), even_parity_dfa()),
                                  ("contains ab", contains_ab_redundant_dfa(), contains_ab_dfa())]:
        M = embed_dfa(source)
        d = extract_dfa(M)
        bad, total = oracle_mismatches(d, M, HORIZON)
        iso = is_isomorphic(minimize_dfa(d), minimal)
        ok &= bad == 0 and iso
        details.append(f"{name}: {bad}/{total} mismatches, isomorphic={iso}")
    for name, M in weakly_ergodic_systems():
        d = extract_dfa(M, M.gap / 2)
        bad, total = oracle_mismatches(d, M, HORIZON)
        ok &= bad == 0
        details.append(f"{name}: {d.n_states} states, {bad}/{total} mismatches")
    return ok, "; ".join(details)


@criterion(5, "definite extraction on the Gaussian two-map system", seconds=120.0)
def check_definite():
    M = gaussian_two_map()
    T, rec = M.system, M.recognizer
    cert = definite_order(M, 8)
    rng = np.random.default_rng(5)
    flips = 0
    for u in iter_words(T.alphabet, cert.r_star):
        vu = classify(rec, word_distribution(T, u)).verdict
        for _ in range(200):
            w = "".join(rng.choice(list(T.alphabet), size=int(rng.integers(0, 9))))
            flips += classify(rec, word_distribution(T, w + u)).verdict is not vu
    table = definite_language_table(M, cert)
    cex = dfa_equiv(table, extract_dfa(M))
    return flips == 0 and cex is None, (
        f"r*={cert.r_star} worst delta={cert.worst_delta:.4g} suffix flips={flips} "
        f"table states={table.n_states} counterexample={cex!r}")


@criterion(6, "measured coefficients respect the decay bound to 3r")
def check_decay():
    systems = [(name, M.system) for name, M in weakly_ergodic_systems()]
    systems += [(name, io.load_bundled(name).system) for name in io.bundled_names()]
    rng = np.random.default_rng(6)
    for i in range(30):
        n, k = int(rng.integers(2, 6)), int(rng.integers(1, 4))
        space = StateSpace.of_size(n)
        ops = {a: MarkovOperator(space, stochastic(rng, n, sparsity=0.4)) for a in "abc"[:k]}
        systems.append((f"random {i}", MarkovSystem("abc"[:k], ops, SignedMeasure.point_mass(space, 0))))
    checked, worst_excess, violations = [], -np.inf, 0
    for name, T in systems:
        try:
            cert = certify_weak_ergodicity(T, 8)
        except NotCertifiedError:
            continue
        checked.append(name)
        for length, ks in iter_level_kernels(T, 3 * cert.r):
            excess = dobrushin_batch(ks) - decay_bound(cert, length)
            violations += int(np.sum(excess > 1e-9))
            worst_excess = max(worst_excess, float(excess.max()))
    return violations == 0 and bool(checked), (
        f"{len(checked)} certified systems, violations={violations}, "
        f"largest measured minus bound={worst_excess:.3g}")


@criterion(7, "quasi-compact bound formula and decomposition on 100 instances")
def check_decomposition():
    rng = np.random.default_rng(7)
    formula_err = split_err = density_excess = 0.0
    for _ in range(100):
        m, eta = int(rng.integers(0, 200)), float(rng.uniform(0.01, 1.0))
        formula_err = max(formula_err, abs(quasi_compact_bound(m, eta) - (m + 2) * (1 - eta) ** m))
        n = int(rng.integers(1, 9))
        P = MarkovOperator(StateSpace.of_size(n), stochastic(rng, n, sparsity=rng.choice([0.0, 0.5])))
        mu = rng.dirichlet(np.ones(n))
        C = float(rng.uniform(0, 4))
        d = yosida_decompose(P, mu, C)
        split_err = max(split_err, float(np.abs(d.Q.kernel + d.R.kernel - P.kernel).max()))
        density_excess = max(density_excess, float((d.Q.kernel - C * mu[None, :]).max()))
    ok = formula_err <= 1e-15 and split_err <= 1e-12 and density_excess <= 1e-15
    return ok, f"formula error={formula_err:.3g} split error={split_err:.3g} density excess={density_excess:.3g}"


@criterion(8, "stability under 100 perturbations at epsilon = beta/r", seconds=180.0)
def check_stability():
    M = io.load_bundled("weakly_ergodic").mcs
    beta = float(M.recognizer.isolation)
    margin = stability_margin(M, beta, 10)
    worst, failed = 0.0, []
    for seed in range(100):
        rep = verify_stability(M, perturb(M.system, margin.epsilon, seed=[42, seed]), HORIZON,
                               beta=beta, r=margin.r)
        worst = max(worst, rep.max_word_distance)
        if not (rep.max_word_distance <= beta + 1e-9 and rep.length_chain_violations == 0
                and rep.suffix_chain_violations == 0 and rep.disagreements == 0
                and rep.undecided_perturbed == 0 and rep.dfa_equal):
            failed.append(seed)
    rejecting = next(x for x in range(M.system.n) if x not in M.recognizer.accepting)
    adv = verify_stability(M, collapse_perturbation(M.system, rejecting), HORIZON, extract=False)
    ok = not failed and adv.disagreements > 0
    return ok, (f"beta={beta} r={margin.r} eps={margin.epsilon:.4g} max distance={worst:.4g} "
                f"failed seeds={failed or 'none'}; collapse: {adv.disagreements} disagreements "
                f"(first {adv.disagreement_witness!r})")


@criterion(9, "orbit and operator covers stabilize by length 8 on the Gaussian system")
def check_covers():
    M = gaussian_two_map()
    eps = M.gap / 4
    ok, details = True, []
    for cover in (orbit_cover, operator_cover):
        rep = cover(M, eps, HORIZON)
        s = rep.stabilized_at
        flat = s is not None and len({rep.counts[L] for L in range(s, HORIZON + 1)}) == 1
        ok &= s is not None and s <= 8 and flat
        details.append(f"{cover.__name__}: stabilized at {s} with {rep.counts[HORIZON]} centers")
    return ok, "; ".join(details)


@criterion(10, "exact and float oracles agree on bundled rational systems")
def check_referee():
    details, ok = [], True
    for name in io.bundled_names():
        M = io.load_bundled(name).mcs
        if any(op.exact is None for op in M.system.operators.values()):
            continue
        exact = enumerate_classify(M, HORIZON, exact=True, strict=False)
        floats = enumerate_classify(M, HORIZON, strict=False)
        iso = M.recognizer.isolation
        compared = [w for w in exact if abs(abs(exact.margins[w]) - iso) > Fraction(1, 10**6)]
        bad = sum(exact[w] != floats[w] for w in compared)
        ok &= bad == 0
        details.append(f"{name}: {bad} of {len(compared)}")
    return ok, "disagreements " + ", ".join(details)


@criterion(11, "CLI reports are byte-identical across runs")
def check_determinism():
    commands = [
        ["simulate", "bundled:weakly_ergodic", "--word", "abba"],
        ["dobrushin", "bundled:three_state"],
        ["certify", "ergodic", "bundled:weakly_ergodic"],
        ["certify", "doeblin", "bundled:gaussian_reflect"],
        ["certify", "quasicompact", "bundled:gaussian_reflect"],
        ["extract", "dfa", "bundled:contains_ab", "--oracle-horizon", "8"],
        ["extract", "definite", "bundled:gaussian_truncate", "--compare"],
        ["stability", "bundled:weakly_ergodic", "--trials", "3", "--seed", "11", "--adversarial", "reject"],
        ["stability", "bundled:weakly_ergodic", "--trials", "2", "--mode", "sparse"],
        ["orbit", "bundled:gaussian_reflect"],
        ["opcover", "bundled:gaussian_reflect", "--maxlen", "6"],
        ["oracle", "bundled:weakly_ergodic", "--maxlen", "8", "--exact"],
        ["oracle", "bundled:three_state"],
    ]
    differing = []
    with tempfile.TemporaryDirectory() as tmp:
        for i, argv in enumerate(commands):
            texts = []
            for attempt in range(2):
                path = Path(tmp) / f"{i}-{attempt}.json"
                out = stdio.StringIO()
                run([*argv, "--report", str(path)], out)
                texts.append((path.read_bytes(), out.getvalue()))
            if texts[0] != texts[1]:
                differing.append(" ".join(argv[:2]))
    return not differing, f"{len(commands)} commands, differing={differing or 'none'}"


def evaluate(number):
    title, seconds, fn = CHECKS[number]
    start = time.perf_counter()
    ok, detail = fn()
    elapsed = time.perf_counter() - start
    if seconds is not None and elapsed > seconds:
        ok = False
        detail += f"; exceeded {seconds:g} s"
    line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title} [{elapsed:.2f} s]: {detail}"
    return bool(ok), line


@pytest.mark.parametrize("number", sorted(CHECKS))
def test_criterion(number, request):
    ok, line = evaluate(number)
    request.config.stash.setdefault(ACCEPTANCE_LINES, []).append(line)
    print(line)
    assert ok, line


if __name__ == "__main__":
    results = [evaluate(n) for n in sorted(CHECKS)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
