import itertools
from fractions import Fraction

import numpy as np
import pytest
from helpers import kernels, make_system, stochastic
from hypothesis import given
from hypothesis import strategies as st

from markovcs.ergodicity import NotCertifiedError, dobrushin
from markovcs.errors import BudgetExceededError
from markovcs.measures import MarkovOperator, operator_distance, validate_markov
from markovcs.recognition import MCS, Recognizer
from markovcs.stability import (
    collapse_perturbation,
    perturb,
    project_to_simplex,
    stability_margin,
    verify_stability,
)
from markovcs.systems import embed_dfa, ends_in_a_dfa, random_weakly_ergodic


@pytest.fixture(scope="module")
def seeded():
    return random_weakly_ergodic(7, noise=Fraction(3, 5))


def brute_r(ks, target, r_max):
    for r in range(1, r_max + 1):
        worst = max(dobrushin(np.linalg.multi_dot(w) if r > 1 else w[0])
                    for w in itertools.product(ks, repeat=r))
        if worst <= target:
            return r
    return None


class TestMargin:
    def test_one_letter_example(self):
        k = np.array([[0.9, 0.1], [0.8, 0.2]])
        assert dobrushin(k) == pytest.approx(0.1)
        m = stability_margin(make_system({"a": k}), 0.7 + 1e-12, 4)
        assert m.r == 1 and m.epsilon == pytest.approx(0.7)

    def test_identity_fails_everywhere(self):
        T = make_system({"a": np.eye(3)})
        with pytest.raises(NotCertifiedError) as info:
            stability_margin(T, 0.7, 6)
        assert info.value.witness == "aaaaaa" and info.value.value == 1.0

    def test_two_letter_example(self):
        a = np.array([[0.8, 0.2], [0.2, 0.8]])
        b = np.array([[0.7, 0.3], [0.1, 0.9]])
        assert dobrushin(a) == pytest.approx(0.6) and dobrushin(b) == pytest.approx(0.6)
        m = stability_margin(make_system({"a": a, "b": b}), 0.7, 8)
        assert m.r <= 5
        assert m.r == brute_r([a, b], 0.1, 8)
        assert m.epsilon == 0.7 / m.r
        assert m.worst_delta <= 0.1

    def test_domain_and_budget(self):
        T = make_system({"a": np.eye(2), "b": np.eye(2), "c": np.eye(2)})
        with pytest.raises(ValueError):
            stability_margin(T, 0.0, 3)
        with pytest.raises(BudgetExceededError):
            stability_margin(T, 0.5, 20)

    @given(st.integers(0, 2**31), st.floats(0.05, 1.0))
    def test_matches_enumeration(self, seed, beta):
        rng = np.random.default_rng(seed)
        ks = [stochastic(rng, 3, min_entry=0.05) for _ in range(2)]
        expected = brute_r(ks, beta / 7, 5)
        T = make_system({"a": ks[0], "b": ks[1]})
        if expected is None:
            with pytest.raises(NotCertifiedError):
                stability_margin(T, beta, 5)
        else:
            m = stability_margin(T, beta, 5)
            assert m.r == expected and m.epsilon == beta / expected


class TestPerturb:
    def test_zero_is_identity(self, seeded):
        T = seeded.system
        assert perturb(T, 0.0, seed=3) is T

    def test_deterministic(self, seeded):
        T = seeded.system
        a, b = perturb(T, 0.05, seed=42), perturb(T, 0.05, seed=42)
        c = perturb(T, 0.05, seed=43)
        for s in T.alphabet:
            np.testing.assert_array_equal(a.operators[s].kernel, b.operators[s].kernel)
        assert any(not np.array_equal(a.operators[s].kernel, c.operators[s].kernel) for s in T.alphabet)

    def test_sparse_moves_one_row(self, seeded):
        T = seeded.system
        P = perturb(T, 0.05, seed=1, mode="sparse")
        for s in T.alphabet:
            moved = np.abs(P.operators[s].kernel - T.operators[s].kernel).sum(axis=1) > 0
            assert moved.sum() == 1

    def test_errors(self, seeded):
        with pytest.raises(ValueError):
            perturb(seeded.system, -0.1)
        with pytest.raises(ValueError):
            perturb(seeded.system, 0.1, mode="burst")

    @given(kernels(max_n=6), st.floats(0.0, 2.0), st.integers(0, 1000), st.sampled_from(["dense", "sparse"]))
    def test_distance_within_epsilon(self, k, eps, seed, mode):
        T = make_system({"a": k})
        P = perturb(T, eps, seed=seed, mode=mode)
        validate_markov(P.operators["a"].kernel)
        assert operator_distance(T.operators["a"], P.operators["a"]) <= eps + 1e-12

    @given(st.lists(st.floats(-2, 2), min_size=1, max_size=8))
    def test_projection_lands_on_simplex(self, v):
        p = project_to_simplex(np.array(v))
        assert np.all(p >= 0) and p.sum() == pytest.approx(1.0)

    def test_projection_fixes_simplex_points(self):
        p = np.array([0.2, 0.5, 0.3])
        np.testing.assert_allclose(project_to_simplex(p), p)


class TestVerify:
    def test_unperturbed(self, seeded):
        rep = verify_stability(seeded, seeded.system, 8, beta=0.05, r=6)
        assert rep.max_word_distance == 0.0 and rep.disagreements == 0
        assert rep.ok and rep.dfa_equal

    def test_margin_perturbation(self, seeded):
        beta = float(seeded.recognizer.isolation)
        m = stability_margin(seeded, beta, 10)
        for seed in range(3):
            P = perturb(seeded.system, m.epsilon, seed=seed)
            rep = verify_stability(seeded, P, 10, beta=beta, r=m.r)
            assert rep.ok, rep
            assert rep.max_word_distance <= beta
            assert rep.perturbed_certificate is not None

    def test_collapse_is_reported(self, seeded):
        rejecting = next(c for c in range(seeded.system.n) if c not in seeded.recognizer.accepting)
        rep = verify_stability(seeded, collapse_perturbation(seeded.system, rejecting), 6)
        assert rep.disagreements > 0 and not rep.ok
        assert rep.disagreement_witness is not None

    def test_collapse_construction(self):
        T = make_system({"a": [[0.5, 0.5], [0.2, 0.8]]})
        C = collapse_perturbation(T, 1)
        np.testing.assert_array_equal(C.operators["a"].kernel, [[0, 1], [0, 1]])
        half = collapse_perturbation(T, 0, strength=0.5)
        np.testing.assert_allclose(half.operators["a"].kernel, [[0.75, 0.25], [0.6, 0.4]])

    def test_dissimilar_systems(self, seeded):
        other = make_system({"a": np.eye(4), "c": np.eye(4)})
        with pytest.raises(ValueError):
            verify_stability(seeded, other, 3)
        with pytest.raises(ValueError):
            verify_stability(seeded, make_system({"a": np.eye(2), "b": np.eye(2)}), 3)

    def test_perturbed_non_recognizer_is_a_finding(self):
        M = embed_dfa(ends_in_a_dfa())
        space = M.system.space
        half = np.full((2, 2), 0.5)
        P = M.system.replace_operators({s: MarkovOperator(space, half) for s in "ab"})
        rep = verify_stability(M, P, 4)
        assert rep.undecided_perturbed > 0 and rep.dfa_equal is None

    @given(st.integers(0, 2**31), st.floats(0.0, 0.3))
    def test_chain_inequalities(self, seed, eps):
        rng = np.random.default_rng(seed)
        T = make_system({a: stochastic(rng, 3, min_entry=0.05) for a in "ab"})
        M = MCS(T, Recognizer((0,), 0.5, 0.01))
        rep = verify_stability(M, perturb(T, eps, seed=seed), 7, r=2, extract=False)
        assert rep.length_chain_violations == 0
        assert rep.transfer_violations == 0
        assert rep.suffix_chain_violations == 0


def test_unit_space_perturbation_is_trivial():
    T = make_system({"a": [[1]]})
    P = perturb(T, 0.5, seed=0)
    assert P.operators["a"].kernel.tolist() == [[1.0]]
