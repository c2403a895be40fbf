import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from htica.errors import InvalidInputError
from htica.evaluation import amari_index, evaluate, frobenius_error, match_columns
from htica.sampling import generate_mixing_matrix


def brute_force(A, A_hat):
    # every permutation and sign pattern: n! 2^n alignments
    n = A.shape[1]
    best = np.inf
    for perm in itertools.permutations(range(n)):
        for signs in itertools.product((-1.0, 1.0), repeat=n):
            cost = sum(np.linalg.norm(A[:, i] - signs[i] * A_hat[:, perm[i]]) for i in range(n))
            best = min(best, cost)
    return best


def signed_permutation(n, g):
    return np.eye(n)[:, g.permutation(n)] * g.choice([-1.0, 1.0], n)


class TestMatching:
    def test_identity(self):
        A = generate_mixing_matrix(4, 0)
        m = match_columns(A, A)
        assert m.permutation.tolist() == [0, 1, 2, 3]
        assert m.signs.tolist() == [1.0] * 4 and m.total_cost == 0.0

    def test_swap_and_negation(self):
        A = generate_mixing_matrix(3, 1)
        A_hat = A[:, [1, 0, 2]] * np.array([1.0, -1.0, 1.0])
        m = match_columns(A, A_hat)
        assert m.permutation.tolist() == [1, 0, 2]
        assert m.signs.tolist() == [-1.0, 1.0, 1.0]
        assert m.total_cost == pytest.approx(0.0, abs=1e-12)
        np.testing.assert_array_equal(m.align(A_hat), A)

    def test_two_by_two_example(self):
        A_hat = np.array([[0.6, 1.0], [0.8, 0.0]])
        m = match_columns(np.eye(2), A_hat)
        assert m.permutation.tolist() == [1, 0]
        # swapped assignment costs 0 + |(0,1) - (0.6,0.8)| = sqrt(0.4)
        assert m.total_cost == pytest.approx(np.sqrt(0.4), abs=1e-12)
        assert frobenius_error(np.eye(2), A_hat) == pytest.approx(np.sqrt(0.4), abs=1e-12)

    @given(seed=st.integers(0, 10**6), n=st.integers(1, 4))
    def test_optimal_against_enumeration(self, seed, n):
        A = generate_mixing_matrix(n, seed)
        A_hat = generate_mixing_matrix(n, seed + 1)
        assert match_columns(A, A_hat).total_cost == pytest.approx(brute_force(A, A_hat), abs=1e-12)

    def test_rejects_non_unit_columns(self):
        with pytest.raises(InvalidInputError):
            match_columns(np.eye(2), 2 * np.eye(2))
        with pytest.raises(InvalidInputError):
            match_columns(np.eye(2), np.eye(3))


class TestFrobenius:
    def test_perfect(self):
        A = generate_mixing_matrix(3, 2)
        assert frobenius_error(A, A) == 0.0

    def test_linear_in_perturbation(self):
        g = np.random.default_rng(0)
        A = generate_mixing_matrix(3, 5)
        E = g.standard_normal((3, 3))
        E /= np.linalg.norm(E)
        eps = 1e-3
        # the optimal matching of a small perturbation is the identity
        m = match_columns(A, A)
        assert frobenius_error(A, A + eps * E, m) == pytest.approx(eps, rel=1e-12)

    @given(seed=st.integers(0, 10**6))
    def test_zero_iff_equal(self, seed):
        g = np.random.default_rng(seed)
        A = generate_mixing_matrix(3, seed)
        P = signed_permutation(3, g)
        assert frobenius_error(A, A @ P) == pytest.approx(0.0, abs=1e-12)
        m = match_columns(A, A @ P)
        np.testing.assert_allclose(m.align(A @ P), A, atol=1e-12)


class TestAmari:
    def test_zero_cases(self):
        A = generate_mixing_matrix(4, 3)
        assert amari_index(A, A) == pytest.approx(0.0, abs=1e-12)
        P = signed_permutation(4, np.random.default_rng(0))
        assert amari_index(np.eye(4), P) == 0.0

    def test_all_equal_is_one(self):
        # P = A_hat^-1 A has all entries equal when A = ones and A_hat = I
        for n in (2, 3, 5):
            assert amari_index(np.ones((n, n)), np.eye(n)) == 1.0

    def test_scalar(self):
        assert amari_index([[2.0]], [[-1.0]]) == 0.0

    @given(seed=st.integers(0, 10**6))
    def test_ambiguity_invariance(self, seed):
        g = np.random.default_rng(seed)
        A = g.standard_normal((4, 4))
        A_hat = g.standard_normal((4, 4))
        P = signed_permutation(4, g)
        assert amari_index(A, A_hat @ P) == pytest.approx(amari_index(A, A_hat), abs=1e-12)

    def test_range(self):
        g = np.random.default_rng(1)
        for _ in range(10**4):
            n = g.integers(2, 6)
            v = amari_index(g.standard_normal((n, n)), g.standard_normal((n, n)))
            assert 0.0 <= v <= 1.0

    def test_singular(self):
        with pytest.raises(InvalidInputError):
            amari_index(np.eye(2), np.ones((2, 2)))


def test_evaluate_bundles_metrics():
    A = generate_mixing_matrix(3, 0)
    rep = evaluate(A, A[:, [2, 0, 1]], method="oracle", N=10)
    assert rep.frobenius_error == pytest.approx(0.0, abs=1e-12)
    assert rep.amari_index == pytest.approx(0.0, abs=1e-12)
    assert rep.matching.permutation.tolist() == [1, 2, 0]
    assert rep.metadata == {"method": "oracle", "N": 10}
