"""Configuration tables, sign conventions and compound matrices.

Orbital indices inside a configuration are 1-based and strictly increasing;
positions are 1-based as well, so sign_of_hole(sigma, sigma[0]) == -1.
Array axes over orbitals are 0-based (orbital i lives at axis index i - 1).
"""

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Dict, Tuple

import numpy as np
from scipy import sparse
from scipy.special import comb

from sim.errors import (
    ConfigurationIndexError,
    InvalidDimensionError,
)

Configuration = Tuple[int, ...]

UNITARY_TOL = 1e-10


@dataclass(frozen=True)
class ConfigTable:
    """Lexicographically ordered configurations of N orbitals out of K."""

    N: int
    K: int
    configs: Tuple[Configuration, ...]
    index: Dict[Configuration, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {c: n for n, c in enumerate(self.configs)})

    @property
    def r(self) -> int:
        return len(self.configs)

    def ordinal(self, config) -> int:
        return self.index[tuple(config)]

    def __len__(self):
        return len(self.configs)

    def __iter__(self):
        return iter(self.configs)


@dataclass(frozen=True)
class CompoundMatrix:
    """r x r matrix of N x N minors of a K x K matrix (rows sigma, columns tau)."""

    entries: np.ndarray
    table: ConfigTable = field(repr=False)

    def unitarity_deviation(self) -> float:
        e = self.entries
        return float(np.linalg.norm(e.conj().T @ e - np.eye(e.shape[0])))


@dataclass(frozen=True)
class TransformedCoefficients:
    """Result of coeff_transform; `unitary` is False when U failed the check."""

    values: np.ndarray
    unitary: bool
    deviation: float


def _check_configuration(sigma, K: int = None) -> Configuration:
    sigma = tuple(int(i) for i in sigma)
    if any(b <= a for a, b in zip(sigma, sigma[1:])):
        raise InvalidDimensionError(f"configuration {sigma} is not strictly increasing")
    if sigma and sigma[0] < 1:
        raise InvalidDimensionError(f"configuration {sigma} has an index below 1")
    if K is not None and sigma and sigma[-1] > K:
        raise InvalidDimensionError(f"configuration {sigma} exceeds K={K}")
    return sigma


@lru_cache(maxsize=None)
def _table(N: int, K: int) -> ConfigTable:
    if N < 0:
        return ConfigTable(N=N, K=K, configs=())
    return ConfigTable(N=N, K=K, configs=tuple(combinations(range(1, K + 1), N)))


def enumerate_configs(N: int, K: int) -> ConfigTable:
    """All increasing maps {1..N} -> {1..K}, in lexicographic order."""
    if N < 1 or K < N:
        raise InvalidDimensionError(f"need 1 <= N <= K, got N={N}, K={K}")
    table = _table(N, K)
    assert table.r == int(comb(K, N, exact=True))
    return table


def sub_table(table: ConfigTable, removed: int) -> ConfigTable:
    """Configuration table with `removed` fewer particles (may be empty or N=0)."""
    if removed not in (1, 2):
        raise InvalidDimensionError(f"can only remove 1 or 2 particles, got {removed}")
    return _table(table.N - removed, table.K)


def sign_of_hole(sigma, i: int) -> int:
    """(-1)^p where p is the 1-based position of orbital i in sigma."""
    sigma = _check_configuration(sigma)
    try:
        position = sigma.index(i) + 1
    except ValueError:
        raise ConfigurationIndexError(f"orbital {i} not in configuration {sigma}") from None
    return -1 if position % 2 else 1


def sign_of_pair(sigma, i: int, j: int) -> int:
    """sgn(i - j) * (-1)^(pos(i) + pos(j)); antisymmetric in (i, j)."""
    if i == j:
        raise ConfigurationIndexError(f"pair sign needs distinct orbitals, got i=j={i}")
    return (1 if i > j else -1) * sign_of_hole(sigma, i) * sign_of_hole(sigma, j)


def is_admissible(N: int, K: int) -> bool:
    """Admissible rank pairs for first-order density matrices."""
    if N < 1 or K < N:
        return False
    if N == 1:
        return K == 1
    if N == 2:
        return K >= 2 and K % 2 == 0
    return K != N + 1


def _minor_index(table: ConfigTable) -> np.ndarray:
    return np.array(table.configs, dtype=np.intp).reshape(table.r, table.N) - 1


def compound_matrix(U: np.ndarray, table: ConfigTable) -> CompoundMatrix:
    """Entry (sigma, tau) is det(U[sigma, tau]), evaluated per minor by LU."""
    U = np.asarray(U)
    if U.shape != (table.K, table.K):
        raise InvalidDimensionError(f"U has shape {U.shape}, table expects {(table.K, table.K)}")
    rows = _minor_index(table)
    minors = U[rows[:, None, :, None], rows[None, :, None, :]]
    return CompoundMatrix(entries=np.linalg.det(minors), table=table)


def unitarity_deviation(U: np.ndarray) -> float:
    U = np.asarray(U)
    return float(np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0])))


def coeff_transform(U: np.ndarray, C: np.ndarray, table: ConfigTable) -> TransformedCoefficients:
    """C' = conj(d(U)) C, so that pi(C', U.Phi) = pi(C, Phi)."""
    C = np.asarray(C)
    if C.shape != (table.r,):
        raise InvalidDimensionError(f"C has shape {C.shape}, expected ({table.r},)")
    deviation = unitarity_deviation(U)
    entries = compound_matrix(U, table).entries
    return TransformedCoefficients(
        values=entries.conj() @ C,
        unitary=deviation <= UNITARY_TOL,
        deviation=deviation,
    )


@lru_cache(maxsize=None)
def annihilators(table: ConfigTable) -> Tuple[sparse.csr_matrix, ...]:
    """Sparse single-hole maps a_i: N-configurations -> (N-1)-configurations.

    a_i[rho, sigma] = sign_of_hole(sigma, i) when sigma minus {i} is rho.
    """
    holes = sub_table(table, 1)
    rows = [[] for _ in range(table.K)]
    cols = [[] for _ in range(table.K)]
    vals = [[] for _ in range(table.K)]
    for s, sigma in enumerate(table.configs):
        for p, i in enumerate(sigma):
            rho = sigma[:p] + sigma[p + 1:]
            rows[i - 1].append(holes.index[rho])
            cols[i - 1].append(s)
            vals[i - 1].append(-1.0 if (p + 1) % 2 else 1.0)
    shape = (holes.r, table.r)
    return tuple(
        sparse.csr_matrix((vals[i], (rows[i], cols[i])), shape=shape)
        for i in range(table.K)
    )


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@lru_cache(maxsize=None)
def hole_tensor(table: ConfigTable) -> np.ndarray:
    """Dense A[rho, i, sigma] stacking the single-hole maps."""
    return _frozen(np.stack([a.toarray() for a in annihilators(table)], axis=1))


@lru_cache(maxsize=None)
def pair_tensor(table: ConfigTable) -> np.ndarray:
    """Dense B[rho, i, j, sigma] = sign_of_pair(sigma, i, j) when sigma minus {i, j} is rho."""
    pairs = sub_table(table, 2)
    B = np.zeros((pairs.r, table.K, table.K, table.r))
    if pairs.r == 0:
        return _frozen(B)
    for s, sigma in enumerate(table.configs):
        for i, j in combinations(sigma, 2):
            rho = tuple(k for k in sigma if k != i and k != j)
            sign = sign_of_pair(sigma, i, j)
            B[pairs.index[rho], i - 1, j - 1, s] = sign
            B[pairs.index[rho], j - 1, i - 1, s] = -sign
    return _frozen(B)


def one_body_config_matrix(M: np.ndarray, table: ConfigTable) -> np.ndarray:
    """M_conf[sigma, tau] = sum over sigma-{i} = tau-{j} of (-1)^(pos i + pos j) M[i, j]."""
    M = np.asarray(M)
    if M.shape != (table.K, table.K):
        raise InvalidDimensionError(f"M has shape {M.shape}, table expects {(table.K, table.K)}")
    A = hole_tensor(table)
    return np.einsum("ris,rjt,ij->st", A, A, M, optimize=True)
