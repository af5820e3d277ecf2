"""Full-CI reference: exact N-body Hamiltonian and propagation on the grid.

The basis is the lexicographic set of N-site determinants (see sim.ansatz),
so every FullWavefunction produced by expand_full can be fed in directly.
"""

from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np
from scipy import linalg, sparse

from sim.ansatz import FullWavefunction, grid_table
from sim.configs import ConfigTable, annihilators
from sim.errors import InvalidDimensionError, OracleSizeError
from sim.grid import Grid, OneBodyOperator, PairPotential

DEFAULT_CAP = 5000


@dataclass
class FullHamiltonian:
    """H_N = sum_mn H[m, n] a_m^dagger a_n + diag(sum_{i<j} v(|x_i - x_j|))."""

    onebody: np.ndarray
    interaction: np.ndarray
    table: ConfigTable = field(repr=False)
    _eig: Optional[tuple] = field(default=None, init=False, repr=False)

    @property
    def matrix(self) -> np.ndarray:
        return self.onebody + np.diag(self.interaction)

    @property
    def dimension(self) -> int:
        return self.table.r

    def eigh(self):
        if self._eig is None:
            self._eig = linalg.eigh(self.matrix)
        return self._eig

    def ground_energy(self) -> float:
        return float(self.eigh()[0][0])

    def hermiticity_deviation(self) -> float:
        M = self.matrix
        return float(np.max(np.abs(M - M.conj().T)))

    def apply(self, psi: FullWavefunction) -> FullWavefunction:
        _check_basis(self.table, psi)
        return FullWavefunction(amplitudes=self.matrix @ psi.amplitudes, table=psi.table)

    def apply_interaction(self, psi: FullWavefunction) -> FullWavefunction:
        _check_basis(self.table, psi)
        return FullWavefunction(amplitudes=self.interaction * psi.amplitudes, table=psi.table)

    def expectation(self, psi: FullWavefunction) -> float:
        return float(np.vdot(psi.amplitudes, self.matrix @ psi.amplitudes).real)


def _check_basis(table: ConfigTable, psi: FullWavefunction) -> None:
    if (psi.table.N, psi.table.K) != (table.N, table.K):
        raise InvalidDimensionError(
            f"wavefunction basis (N={psi.table.N}, L={psi.table.K}) does not match "
            f"Hamiltonian basis (N={table.N}, L={table.K})"
        )


def onebody_full(matrix: np.ndarray, table: ConfigTable) -> np.ndarray:
    """Slater-Condon one-body rule over site determinants, via sparse annihilators."""
    ops = annihilators(table)
    A = sparse.vstack(ops, format="csr")
    holes = ops[0].shape[0]
    lifted = sparse.kron(sparse.csr_matrix(matrix), sparse.identity(holes), format="csr")
    return (A.T @ (lifted @ A)).toarray()


def interaction_diagonal(grid: Grid, v: PairPotential, table: ConfigTable) -> np.ndarray:
    if table.N < 2 or v.is_zero:
        return np.zeros(table.r)
    d = grid.distance_index()
    sites = np.array(table.configs, dtype=np.intp) - 1
    samples = np.asarray(v.samples, dtype=float)
    total = np.zeros(table.r)
    for i, j in combinations(range(table.N), 2):
        total += samples[d[sites[:, i], sites[:, j]]]
    return total


def build_full_hamiltonian(
    grid: Grid, H: OneBodyOperator, v: PairPotential, N: int, cap: int = DEFAULT_CAP, t: float = 0.0
) -> FullHamiltonian:
    table = grid_table(N, grid)
    if table.r > cap:
        raise OracleSizeError(table.r, cap)
    return FullHamiltonian(
        onebody=onebody_full(H.at(t), table),
        interaction=interaction_diagonal(grid, v, table),
        table=table,
    )


def propagate_exact(psi0: FullWavefunction, Hfull: FullHamiltonian, T: float) -> FullWavefunction:
    """exp(-i T H_N) psi0 by full eigendecomposition."""
    _check_basis(Hfull.table, psi0)
    if T == 0:
        return FullWavefunction(amplitudes=np.array(psi0.amplitudes, dtype=complex), table=psi0.table)
    w, V = Hfull.eigh()
    amplitudes = V @ (np.exp(-1j * T * w) * (V.conj().T @ psi0.amplitudes))
    return FullWavefunction(amplitudes=amplitudes, table=psi0.table)


def compare(a: FullWavefunction, b: FullWavefunction):
    """(l2 distance, phase-insensitive fidelity |<a, b>|)."""
    if (a.table.N, a.table.K) != (b.table.N, b.table.K):
        raise InvalidDimensionError("cannot compare wavefunctions on different bases")
    distance = float(np.linalg.norm(a.amplitudes - b.amplitudes))
    fidelity = float(abs(np.vdot(a.amplitudes, b.amplitudes)))
    return distance, fidelity
