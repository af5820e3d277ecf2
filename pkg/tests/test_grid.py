"""Grid, one-body operator, waveforms, pair potentials and orthonormalization."""

import numpy as np
import pytest

from sim.errors import InvalidDimensionError, RankDeficiencyError
from sim.grid import (
    Laser,
    PairPotential,
    Waveform,
    build_grid,
    build_onebody,
    constant_pair,
    convolve_pair,
    gram,
    gram_deviation,
    harmonic,
    inner,
    lowdin_orthonormalize,
    one_body_eigenstates,
    orbital_norms,
    pair_from_function,
    random_orbitals,
    soft_coulomb,
    soft_coulomb_well,
    zero_pair,
)


# ---------------------------------------------------------------------------
# Grid and inner products
# ---------------------------------------------------------------------------

class TestGrid:

    def test_points_centered(self):
        grid = build_grid(6, 0.5)
        assert np.allclose(grid.points, [-1.25, -0.75, -0.25, 0.25, 0.75, 1.25])

    @pytest.mark.parametrize("L, h, boundary", [(1, 0.5, "dirichlet"), (4, 0.0, "dirichlet"), (4, 0.5, "open")])
    def test_invalid_grid_raises(self, L, h, boundary):
        with pytest.raises(InvalidDimensionError):
            build_grid(L, h, boundary)

    def test_periodic_distance_is_minimum_image(self):
        d = build_grid(6, 1.0, "periodic").distance_index()
        assert d[0, 5] == 1
        assert d[0, 3] == 3

    def test_inner_is_weighted_and_linear_in_first_slot(self):
        grid = build_grid(4, 0.5)
        f = np.array([1, 2j, 0, 1])
        g = np.array([1, 1, 1, 1j])
        assert np.isclose(inner(grid, f, g), 0.5 * np.sum(f * np.conj(g)))
        assert np.isclose(inner(grid, 2j * f, g), 2j * inner(grid, f, g))


# ---------------------------------------------------------------------------
# Waveforms and the one-body operator
# ---------------------------------------------------------------------------

class TestWaveform:

    def test_gaussian_sine_vanishes_at_zero(self):
        w = Waveform(kind="gaussian-sine", amplitude=0.5, tau=0.3, frequency=6.0)
        assert w(0.0) == 0.0
        assert not w.is_static

    def test_ramp_clamps(self):
        w = Waveform(kind="ramp", start=1.0, end=3.0, duration=2.0)
        assert w(-1.0) == 1.0
        assert w(1.0) == 2.0
        assert w(5.0) == 3.0

    def test_unknown_kind_raises(self):
        with pytest.raises(InvalidDimensionError):
            Waveform(kind="square")


class TestOneBodyOperator:

    def test_static_operator_hermitian(self):
        grid = build_grid(12, 0.5)
        H = build_onebody(grid, harmonic(1.0))
        M = H.at(0.0)
        assert np.allclose(M, M.conj().T)
        assert H.is_static

    def test_laser_operator_hermitian_at_all_times(self):
        grid = build_grid(12, 0.5)
        laser = Laser(vector_potential=Waveform(kind="gaussian-sine", amplitude=0.7, tau=0.5, frequency=3.0))
        H = build_onebody(grid, soft_coulomb_well(2.0), laser=laser)
        assert not H.is_static
        for t in (0.1, 0.4, 1.3):
            M = H.at(t)
            assert np.allclose(M, M.conj().T)

    def test_laser_with_zero_field_matches_static(self):
        grid = build_grid(10, 0.5)
        static = build_onebody(grid, harmonic(1.0))
        driven = build_onebody(grid, harmonic(1.0), laser=Laser())
        assert np.allclose(static.at(0.0), driven.at(0.7))

    def test_half_kinetic_flag_scales_laplacian(self):
        grid = build_grid(10, 0.5)
        half = build_onebody(grid)
        full = build_onebody(grid, half_kinetic=False)
        assert np.allclose(2.0 * half.at(), full.at())

    def test_harmonic_ground_energy(self):
        """Finite differences approach omega / 2 from below."""
        grid = build_grid(64, 0.2)
        w, _ = one_body_eigenstates(build_onebody(grid, harmonic(1.0)), 1)
        assert abs(w[0] - 0.5) < 1e-2

    def test_eigenstates_are_h_orthonormal(self):
        grid = build_grid(16, 0.4)
        _, V = one_body_eigenstates(build_onebody(grid, harmonic(1.0)), 5)
        assert gram_deviation(grid, V) < 1e-12

    def test_propagator_is_unitary_exponential(self):
        grid = build_grid(8, 0.5)
        H = build_onebody(grid, harmonic(1.0))
        P = H.propagator(0.3)
        assert np.allclose(P.conj().T @ P, np.eye(8))
        assert np.allclose(H.propagator(0.15) @ H.propagator(0.15), P)

    def test_dirichlet_kinetic_is_positive(self):
        """-k Laplacian with Dirichlet closure is positive definite; periodic closure has a zero mode."""
        for half in (True, False):
            H = build_onebody(build_grid(12, 0.4), half_kinetic=half)
            assert np.linalg.eigvalsh(H.kinetic())[0] > 0.0
        periodic = build_onebody(build_grid(12, 0.4, boundary="periodic"))
        assert abs(np.linalg.eigvalsh(periodic.kinetic())[0]) < 1e-12

    def test_potential_shape_checked(self):
        with pytest.raises(InvalidDimensionError):
            build_onebody(build_grid(6, 0.5), np.zeros(5))


# ---------------------------------------------------------------------------
# Pair potentials
# ---------------------------------------------------------------------------

class TestPairPotential:

    def test_soft_coulomb_samples(self):
        grid = build_grid(5, 0.5)
        v = soft_coulomb(grid, strength=2.0, softening=1.0)
        assert np.allclose(v.samples, 2.0 / np.sqrt((np.arange(5) * 0.5) ** 2 + 1.0))
        assert v.nonneg

    def test_matrix_symmetric(self):
        grid = build_grid(7, 0.3)
        M = soft_coulomb(grid).matrix(grid)
        assert np.allclose(M, M.T)
        assert np.allclose(np.diag(M), 1.0)

    def test_declared_nonneg_checked(self):
        grid = build_grid(4, 1.0)
        with pytest.raises(InvalidDimensionError):
            pair_from_function(grid, lambda d: d - 1.0, nonneg=True)

    def test_complex_samples_rejected(self):
        with pytest.raises(InvalidDimensionError):
            PairPotential(samples=np.array([1.0, 1j]))

    def test_zero_pair_is_zero(self):
        grid = build_grid(4, 1.0)
        assert zero_pair(grid).is_zero
        assert not constant_pair(grid, 0.5).is_zero

    def test_convolution_matches_double_sum(self, rng):
        grid = build_grid(6, 0.4)
        v = soft_coulomb(grid)
        f = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        x = grid.points
        direct = [grid.h * sum(f[n] / np.sqrt((x[m] - x[n]) ** 2 + 1.0) for n in range(6)) for m in range(6)]
        assert np.allclose(convolve_pair(grid, v, f), direct)

    def test_convolution_commutes_with_conjugation(self, rng):
        grid = build_grid(8, 0.5)
        v = soft_coulomb(grid)
        f = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        assert np.allclose(np.conj(convolve_pair(grid, v, f)), convolve_pair(grid, v, np.conj(f)))

    def test_pair_density_convolution_bound(self, rng):
        """max |(phi conj(psi) * v)| <= max v ||phi|| ||psi||."""
        grid = build_grid(12, 0.5)
        v = soft_coulomb(grid, strength=1.5, softening=0.7)
        for _ in range(20):
            phi = rng.standard_normal(12) + 1j * rng.standard_normal(12)
            psi = rng.standard_normal(12) + 1j * rng.standard_normal(12)
            lhs = np.max(np.abs(convolve_pair(grid, v, phi * psi.conj())))
            norms = np.sqrt(inner(grid, phi, phi).real * inner(grid, psi, psi).real)
            assert lhs <= np.max(v.samples) * norms + 1e-12

    def test_sample_count_checked(self):
        with pytest.raises(InvalidDimensionError):
            PairPotential(samples=np.ones(3)).matrix(build_grid(4, 1.0))


# ---------------------------------------------------------------------------
# Orbital sets
# ---------------------------------------------------------------------------

class TestOrbitals:

    def test_random_orbitals_orthonormal(self, rng):
        grid = build_grid(10, 0.3)
        Phi = random_orbitals(grid, 4, rng)
        assert np.allclose(gram(grid, Phi), np.eye(4))

    def test_orbital_norms_match_gram_diagonal(self, rng):
        grid = build_grid(10, 0.3)
        Phi = 2.0 * random_orbitals(grid, 3, rng)
        assert np.allclose(orbital_norms(grid, Phi), 2.0)
        assert np.allclose(orbital_norms(grid, Phi) ** 2, np.diag(gram(grid, Phi)).real)

    def test_too_many_orbitals_raise(self, rng):
        with pytest.raises(InvalidDimensionError):
            random_orbitals(build_grid(3, 1.0), 4, rng)

    def test_lowdin_keeps_span(self, rng):
        grid = build_grid(10, 0.5)
        Z = rng.standard_normal((10, 3)) + 1j * rng.standard_normal((10, 3))
        Q = lowdin_orthonormalize(grid, Z)
        assert gram_deviation(grid, Q) < 1e-12
        coeffs, *_ = np.linalg.lstsq(Z, Q, rcond=None)
        assert np.allclose(Z @ coeffs, Q)

    def test_lowdin_fixes_orthonormal_frame(self, rng):
        grid = build_grid(8, 0.5)
        Phi = random_orbitals(grid, 3, rng)
        assert np.allclose(lowdin_orthonormalize(grid, Phi), Phi)

    def test_lowdin_singular_raises(self):
        grid = build_grid(6, 1.0)
        Z = np.ones((6, 2))
        with pytest.raises(RankDeficiencyError):
            lowdin_orthonormalize(grid, Z)
