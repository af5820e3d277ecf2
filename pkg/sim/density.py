"""Density matrices of MC coefficient vectors.

Gamma(C) is stored with the adjoint convention: Gamma[i, j] = conj(gamma_ij),
which is the expectation of a_i^dagger a_j in the orbital basis. The rank-4
tensor is gamma_ijkl = 1/2 <a_k^dagger a_l^dagger a_j a_i>.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.special import xlogy

from sim.configs import ConfigTable, hole_tensor, pair_tensor
from sim.errors import InvalidDimensionError, OccupationRangeError

NORM_TOL = 1e-10
REGULARIZATION_MODES = ("shift", "exponential")


@dataclass(frozen=True)
class DensityMatrix1:
    entries: np.ndarray
    normalized: bool = True

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries).real)


@dataclass(frozen=True)
class DensityTensor2:
    entries: np.ndarray
    normalized: bool = True


@dataclass(frozen=True)
class RankDiagnostics:
    mu: float
    inv_frobenius: float
    occupations: np.ndarray
    singular: bool


def _check_coefficients(C: np.ndarray, table: ConfigTable) -> np.ndarray:
    C = np.asarray(C)
    if C.shape != (table.r,):
        raise InvalidDimensionError(f"C has shape {C.shape}, expected ({table.r},)")
    return C


def gamma1_matrix(C: np.ndarray, table: ConfigTable) -> np.ndarray:
    """Gamma = X^dagger X with X[rho, i] = (a_i C)[rho]."""
    X = hole_tensor(table) @ _check_coefficients(C, table)
    return X.conj().T @ X


def gamma1(C: np.ndarray, table: ConfigTable) -> DensityMatrix1:
    C = _check_coefficients(C, table)
    return DensityMatrix1(
        entries=gamma1_matrix(C, table),
        normalized=abs(np.linalg.norm(C) - 1.0) <= NORM_TOL,
    )


def gamma2(C: np.ndarray, table: ConfigTable) -> DensityTensor2:
    C = _check_coefficients(C, table)
    Y = pair_tensor(table) @ C
    return DensityTensor2(
        entries=0.5 * np.einsum("rij,rkl->ijkl", Y, Y.conj()),
        normalized=abs(np.linalg.norm(C) - 1.0) <= NORM_TOL,
    )


def gamma2_contract(g2: np.ndarray, N: int) -> np.ndarray:
    """gamma_ij recovered as 2/(N-1) sum_k gamma_ikjk."""
    if N < 2:
        raise InvalidDimensionError("contraction needs N >= 2")
    return 2.0 / (N - 1) * np.einsum("ikjk->ij", g2)


def occupations(Gamma: np.ndarray):
    """Eigenvalues in descending order and the unitary V with V^* Gamma V diagonal."""
    w, V = linalg.eigh(Gamma)
    order = np.argsort(w)[::-1]
    return w[order], V[:, order]


def regularize(Gamma: np.ndarray, epsilon: float, mode: str = "shift") -> np.ndarray:
    """Gamma + eps Id, or Gamma + eps exp(-Gamma / eps) in Gamma's eigenbasis."""
    if not epsilon > 0:
        raise InvalidDimensionError(f"regularization needs epsilon > 0, got {epsilon}")
    if mode == "shift":
        return Gamma + epsilon * np.eye(Gamma.shape[0])
    if mode == "exponential":
        w, V = linalg.eigh(Gamma)
        return (V * (w + epsilon * np.exp(-w / epsilon))) @ V.conj().T
    raise InvalidDimensionError(f"unknown regularization mode {mode!r}; expected {REGULARIZATION_MODES}")


def rank_diagnostics(Gamma: np.ndarray, tol: float = 1e-10) -> RankDiagnostics:
    w = linalg.eigvalsh(Gamma)
    mu = float(w[0])
    singular = mu < tol
    inv = float("inf") if mu <= 0.0 else float(np.sqrt(np.sum(1.0 / w ** 2)))
    return RankDiagnostics(mu=mu, inv_frobenius=inv, occupations=w[::-1], singular=singular)


def is_full_rank(Gamma: np.ndarray, tol: float = 1e-10) -> bool:
    return not rank_diagnostics(Gamma, tol).singular


def nonfreeness(occ, tol: float = 1e-10) -> float:
    """-sum(g log g + (1 - g) log(1 - g)), with 0 log 0 = 0."""
    g = np.asarray(occ, dtype=float)
    if np.any(g < -tol) or np.any(g > 1.0 + tol):
        raise OccupationRangeError(f"occupations outside [0, 1]: {g}")
    g = np.clip(g, 0.0, 1.0)
    return float(-np.sum(xlogy(g, g) + xlogy(1.0 - g, 1.0 - g)))
