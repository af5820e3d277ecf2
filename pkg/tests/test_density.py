"""One- and two-body density matrices, regularization and non-freeness."""

import numpy as np
import pytest
from scipy import linalg

from sim.configs import coeff_transform, enumerate_configs
from sim.density import (
    gamma1,
    gamma1_matrix,
    gamma2,
    gamma2_contract,
    is_full_rank,
    nonfreeness,
    occupations,
    rank_diagnostics,
    regularize,
)
from sim.errors import InvalidDimensionError, OccupationRangeError
from tests.conftest import random_unitary


def _random_C(table, rng):
    C = rng.standard_normal(table.r) + 1j * rng.standard_normal(table.r)
    return C / np.linalg.norm(C)


# ---------------------------------------------------------------------------
# Gamma
# ---------------------------------------------------------------------------

class TestGamma1:

    @pytest.mark.parametrize("N, K", [(2, 4), (3, 5), (2, 6)])
    def test_hermitian_trace_and_spectrum(self, N, K, rng):
        """Gamma is Hermitian with trace N and eigenvalues in [0, 1]."""
        table = enumerate_configs(N, K)
        for _ in range(1000):
            G = gamma1_matrix(_random_C(table, rng), table)
            w = linalg.eigvalsh(G)
            assert np.max(np.abs(G - G.conj().T)) < 1e-12
            assert abs(np.trace(G) - N) < 1e-12
            assert w[0] > -1e-12 and w[-1] < 1 + 1e-12

    def test_single_configuration_is_projector(self):
        table = enumerate_configs(2, 4)
        C = np.zeros(table.r)
        C[table.ordinal((2, 4))] = 1.0
        assert np.allclose(gamma1_matrix(C, table), np.diag([0, 1, 0, 1]))

    def test_normalization_flag(self):
        table = enumerate_configs(2, 4)
        C = np.ones(table.r)
        assert not gamma1(C, table).normalized
        assert np.isclose(gamma1(C, table).trace, 2.0 * table.r)
        assert gamma1(C / np.linalg.norm(C), table).normalized

    def test_wrong_length_raises(self):
        with pytest.raises(InvalidDimensionError):
            gamma1(np.ones(5), enumerate_configs(2, 4))

    def test_conjugation_under_gauge(self, rng):
        """C' = conj(d(U)) C gives Gamma' = U Gamma U^*."""
        table = enumerate_configs(3, 5)
        C = _random_C(table, rng)
        U = random_unitary(5, rng)
        moved = coeff_transform(U, C, table).values
        G = gamma1_matrix(C, table)
        assert np.max(np.abs(gamma1_matrix(moved, table) - U @ G @ U.conj().T)) < 1e-12


class TestGamma2:

    @pytest.mark.parametrize("N, K", [(2, 4), (3, 5), (3, 6)])
    def test_symmetries(self, N, K, rng):
        table = enumerate_configs(N, K)
        for _ in range(50):
            g = gamma2(_random_C(table, rng), table).entries
            assert np.max(np.abs(g + g.transpose(1, 0, 2, 3))) < 1e-12
            assert np.max(np.abs(g + g.transpose(0, 1, 3, 2))) < 1e-12
            assert np.max(np.abs(g - g.transpose(2, 3, 0, 1).conj())) < 1e-12

    @pytest.mark.parametrize("N, K", [(2, 4), (3, 5), (4, 6)])
    def test_contraction_recovers_gamma1(self, N, K, rng):
        table = enumerate_configs(N, K)
        for _ in range(50):
            C = _random_C(table, rng)
            g1 = gamma1_matrix(C, table)
            assert np.max(np.abs(gamma2_contract(gamma2(C, table).entries, N) - g1.T)) < 1e-12

    def test_trace_counts_pairs(self, rng):
        """sum_ij gamma_ijij = N(N - 1) / 2."""
        table = enumerate_configs(3, 6)
        g = gamma2(_random_C(table, rng), table).entries
        assert np.isclose(np.einsum("ijij->", g), 3.0)

    def test_contract_needs_two_particles(self):
        with pytest.raises(InvalidDimensionError):
            gamma2_contract(np.zeros((2, 2, 2, 2)), 1)


# ---------------------------------------------------------------------------
# Occupations, rank, regularization
# ---------------------------------------------------------------------------

class TestRank:

    def test_occupations_descending_and_diagonalizing(self, rng):
        table = enumerate_configs(3, 5)
        G = gamma1_matrix(_random_C(table, rng), table)
        w, V = occupations(G)
        assert np.all(np.diff(w) <= 1e-14)
        assert np.allclose(V.conj().T @ G @ V, np.diag(w))

    def test_two_configuration_state_is_full_rank(self):
        table = enumerate_configs(2, 4)
        C = np.zeros(table.r)
        C[0], C[-1] = np.sqrt(0.7), np.sqrt(0.3)
        diag = rank_diagnostics(gamma1_matrix(C, table))
        assert np.isclose(diag.mu, 0.3)
        assert np.isclose(diag.inv_frobenius, np.sqrt(2 / 0.49 + 2 / 0.09))
        assert not diag.singular

    def test_slater_determinant_is_singular(self):
        table = enumerate_configs(2, 4)
        C = np.zeros(table.r)
        C[0] = 1.0
        assert not is_full_rank(gamma1_matrix(C, table))

    @pytest.mark.parametrize("mode", ["shift", "exponential"])
    def test_regularized_matrix_is_invertible(self, mode):
        G = np.diag([1.0, 0.5, 0.0])
        R = regularize(G, 1e-3, mode)
        assert linalg.eigvalsh(R)[0] >= 1e-3 - 1e-15
        assert np.allclose(R, R.conj().T)

    def test_regularization_vanishes_with_epsilon(self):
        G = np.diag([0.9, 0.6, 0.3])
        for mode in ("shift", "exponential"):
            assert np.max(np.abs(regularize(G, 1e-8, mode) - G)) < 1e-7

    def test_regularization_needs_positive_epsilon(self):
        with pytest.raises(InvalidDimensionError):
            regularize(np.eye(2), 0.0)

    def test_unknown_mode_raises(self):
        with pytest.raises(InvalidDimensionError):
            regularize(np.eye(2), 1e-3, "cubic")


# ---------------------------------------------------------------------------
# Non-freeness
# ---------------------------------------------------------------------------

class TestNonfreeness:

    def test_zero_on_slater_determinants(self):
        assert abs(nonfreeness([1.0, 1.0, 0.0, 0.0])) <= 1e-12

    def test_positive_on_two_configurations(self):
        table = enumerate_configs(2, 4)
        C = np.zeros(table.r)
        C[0], C[-1] = np.sqrt(0.9), np.sqrt(0.1)
        assert nonfreeness(occupations(gamma1_matrix(C, table))[0]) >= 1e-6

    def test_binary_entropy_value(self):
        assert np.isclose(nonfreeness([0.5]), np.log(2.0))

    def test_gauge_invariant(self, rng):
        table = enumerate_configs(3, 6)
        C = _random_C(table, rng)
        moved = coeff_transform(random_unitary(6, rng), C, table).values
        s0 = nonfreeness(occupations(gamma1_matrix(C, table))[0])
        s1 = nonfreeness(occupations(gamma1_matrix(moved, table))[0])
        assert abs(s0 - s1) < 1e-10

    def test_out_of_range_raises(self):
        with pytest.raises(OccupationRangeError):
            nonfreeness([1.2, 0.3])
