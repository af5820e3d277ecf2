"""The map pi(C, Phi) to full N-body wavefunctions on the grid.

A FullWavefunction stores amplitudes over the lexicographic determinant basis
of the L grid sites, i.e. over configurations of N sites out of L. The grid
measure h^(N/2) is folded into the amplitudes, so the l2 norm of the
amplitude vector is the L2 norm of Psi.

Orbital arguments `k` are 0-based column indices of Phi.
"""

from dataclasses import dataclass

import numpy as np

from sim.configs import ConfigTable, annihilators, enumerate_configs, sub_table
from sim.errors import InvalidDimensionError, UnsupportedOrderError
from sim.grid import Grid, OrbitalSet


@dataclass(frozen=True)
class FullWavefunction:
    amplitudes: np.ndarray
    table: ConfigTable

    @property
    def N(self) -> int:
        return self.table.N

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def inner(self, other: "FullWavefunction") -> complex:
        """<self | other> = sum(self * conj(other))."""
        _same_basis(self, other)
        return complex(np.vdot(other.amplitudes, self.amplitudes))


def _same_basis(a: FullWavefunction, b: FullWavefunction) -> None:
    if (a.table.N, a.table.K) != (b.table.N, b.table.K):
        raise InvalidDimensionError(
            f"wavefunctions live on different bases: (N={a.table.N}, L={a.table.K}) "
            f"vs (N={b.table.N}, L={b.table.K})"
        )


def grid_table(N: int, grid: Grid) -> ConfigTable:
    if grid.L < N:
        raise InvalidDimensionError(f"cannot place N={N} fermions on L={grid.L} sites")
    return enumerate_configs(N, grid.L)


def _check_orbitals(Phi: OrbitalSet, grid: Grid, K: int = None) -> np.ndarray:
    Phi = np.asarray(Phi)
    if Phi.ndim != 2 or Phi.shape[0] != grid.L:
        raise InvalidDimensionError(f"orbitals have shape {Phi.shape}, grid has L={grid.L}")
    if K is not None and Phi.shape[1] != K:
        raise InvalidDimensionError(f"expected K={K} orbitals, got {Phi.shape[1]}")
    return Phi


def configuration_basis(Phi: OrbitalSet, grid: Grid, table: ConfigTable) -> np.ndarray:
    """D x r matrix whose column sigma holds the amplitudes of Phi_sigma."""
    Phi = _check_orbitals(Phi, grid, table.K)
    sites = grid_table(table.N, grid)
    lam = np.array(sites.configs, dtype=np.intp).reshape(sites.r, table.N) - 1
    sig = np.array(table.configs, dtype=np.intp).reshape(table.r, table.N) - 1
    psi = np.sqrt(grid.h) * Phi
    minors = psi[lam[:, None, :, None], sig[None, :, None, :]]
    return np.linalg.det(minors)


def expand_full(C: np.ndarray, Phi: OrbitalSet, table: ConfigTable, grid: Grid) -> FullWavefunction:
    C = np.asarray(C)
    if C.shape != (table.r,):
        raise InvalidDimensionError(f"C has shape {C.shape}, expected ({table.r},)")
    return FullWavefunction(
        amplitudes=configuration_basis(Phi, grid, table) @ C,
        table=grid_table(table.N, grid),
    )


def slater_overlap(grid: Grid, Phi: OrbitalSet, Xi: OrbitalSet) -> complex:
    """det(<phi_i, xi_j>)."""
    Phi = _check_orbitals(Phi, grid)
    Xi = _check_orbitals(Xi, grid)
    if Phi.shape != Xi.shape:
        raise InvalidDimensionError(f"orbital families differ in shape: {Phi.shape} vs {Xi.shape}")
    return complex(np.linalg.det(grid.h * (Phi.T @ Xi.conj())))


# ---------------------------------------------------------------------------
# Site creation / annihilation
# ---------------------------------------------------------------------------

def site_holes(psi: FullWavefunction) -> np.ndarray:
    """S[m] = a_m Psi for every grid site m, shape (L, D_{N-1})."""
    return np.stack([a @ psi.amplitudes for a in annihilators(psi.table)])


def annihilate(grid: Grid, f: np.ndarray, psi: FullWavefunction) -> FullWavefunction:
    """a(f) Psi with a(f) = sum_m conj(sqrt(h) f_m) a_m."""
    weights = np.sqrt(grid.h) * np.conj(f)
    return FullWavefunction(amplitudes=weights @ site_holes(psi), table=sub_table(psi.table, 1))


def create(grid: Grid, zeta: np.ndarray, chi: FullWavefunction, N: int) -> FullWavefunction:
    """a^dagger(zeta) chi, landing on the N-particle basis."""
    table = grid_table(N, grid)
    if chi.table.N != N - 1:
        raise InvalidDimensionError(f"expected an (N-1)={N - 1} particle function, got N={chi.table.N}")
    out = np.zeros(table.r, dtype=complex)
    for m, a in enumerate(annihilators(table)):
        if zeta[m] != 0:
            out += np.sqrt(grid.h) * zeta[m] * (a.T @ chi.amplitudes)
    return FullWavefunction(amplitudes=out, table=table)


# ---------------------------------------------------------------------------
# Orbital-direction derivatives
# ---------------------------------------------------------------------------

def _check_column(k: int, K: int) -> int:
    if not 0 <= k < K:
        raise InvalidDimensionError(f"orbital index {k} out of range for K={K}")
    return k


def single_hole(
    C: np.ndarray,
    Phi: OrbitalSet,
    k: int,
    table: ConfigTable,
    grid: Grid,
    psi: FullWavefunction = None,
) -> FullWavefunction:
    """Contraction of Psi against conj(phi_k) in the last particle slot."""
    _check_column(k, table.K)
    if psi is None:
        psi = expand_full(C, Phi, table, grid)
    N = psi.N
    hole = annihilate(grid, Phi[:, k], psi)
    return FullWavefunction(amplitudes=(-1) ** N / np.sqrt(N) * hole.amplitudes, table=hole.table)


def rebuild_from_holes(Phi: OrbitalSet, holes, grid: Grid) -> FullWavefunction:
    """Euler identity: Psi = (-1)^N / sqrt(N) sum_k a^dagger(phi_k) hole_k."""
    holes = list(holes)
    N = holes[0].table.N + 1
    total = np.zeros(grid_table(N, grid).r, dtype=complex)
    for k, hole in enumerate(holes):
        total += create(grid, Phi[:, k], hole, N).amplitudes
    return FullWavefunction(amplitudes=(-1) ** N / np.sqrt(N) * total, table=grid_table(N, grid))


def orbital_derivative(
    C: np.ndarray, Phi: OrbitalSet, k: int, zeta: np.ndarray, table: ConfigTable, grid: Grid
) -> FullWavefunction:
    """dPsi/dphi_k[zeta]: column k replaced by zeta in every configuration containing k."""
    _check_column(k, table.K)
    Phi = np.array(Phi, dtype=complex)
    Phi[:, k] = zeta
    mask = np.array([(k + 1) in sigma for sigma in table.configs])
    return expand_full(np.where(mask, C, 0), Phi, table, grid)


def dphi_adjoint(
    C: np.ndarray, Phi: OrbitalSet, k: int, xi: FullWavefunction, table: ConfigTable, grid: Grid
) -> np.ndarray:
    """(dPsi/dphi_k)^*[Xi] as an orbital, so that <A, zeta> = <Xi | dPsi/dphi_k[zeta]>."""
    _check_column(k, table.K)
    psi = expand_full(C, Phi, table, grid)
    _same_basis(psi, xi)
    chi = annihilate(grid, Phi[:, k], psi)
    return site_holes(xi) @ chi.amplitudes.conj() / np.sqrt(grid.h)


def orbital_gradient(
    C: np.ndarray, Phi: OrbitalSet, xi: FullWavefunction, table: ConfigTable, grid: Grid
) -> np.ndarray:
    """All K adjoints stacked as an (L, K) orbital set."""
    return np.stack([dphi_adjoint(C, Phi, k, xi, table, grid) for k in range(table.K)], axis=1)


# ---------------------------------------------------------------------------
# Reduced densities
# ---------------------------------------------------------------------------

def reduced_density(psi: FullWavefunction, n: int) -> np.ndarray:
    """Density kernel times h^n, as a matrix over ordered n-tuples of sites.

    n = 1: G[x, y] = <a_x Psi, a_y Psi>, trace N.
    n = 2: G[(x1, x2), (y1, y2)] = 1/2 <a_x2 a_x1 Psi, a_y2 a_y1 Psi>, trace N(N-1)/2.
    """
    if n not in (1, 2):
        raise UnsupportedOrderError(f"reduced densities are available for n in {{1, 2}}, got {n}")
    if psi.N < n:
        raise InvalidDimensionError(f"order {n} density needs N >= {n}, got N={psi.N}")
    B = site_holes(psi)
    if n == 1:
        return B @ B.conj().T
    inner_ops = annihilators(sub_table(psi.table, 1))
    L = psi.table.K
    B2 = np.stack([[a @ B[x1] for a in inner_ops] for x1 in range(L)]).reshape(L * L, -1)
    return 0.5 * (B2 @ B2.conj().T)


def contract_density(G2: np.ndarray, N: int) -> np.ndarray:
    """Order-1 density from order 2 with the factor 2/(N-1)."""
    L = int(round(np.sqrt(G2.shape[0])))
    return 2.0 / (N - 1) * np.einsum("xzyz->xy", G2.reshape(L, L, L, L))
