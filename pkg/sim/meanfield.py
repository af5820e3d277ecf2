"""Mean-field building blocks: D_v pairings, K[Phi], W[C, Phi], projector, energy."""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from sim.configs import ConfigTable, one_body_config_matrix, pair_tensor
from sim.density import gamma1_matrix, gamma2
from sim.errors import InvalidDimensionError
from sim.grid import Grid, OneBodyOperator, OrbitalSet, PairPotential, convolve_pair, gram_deviation

ORTHONORMAL_TOL = 1e-8


@dataclass(frozen=True)
class MeanFieldData:
    Kmat: np.ndarray
    Wop: np.ndarray
    orthonormal: bool = True


def pair_D(grid: Grid, v: PairPotential, f: np.ndarray, g: np.ndarray) -> complex:
    """D_v(f, g) = h^2 sum_mn v(|x_m - x_n|) f(x_m) conj(g(x_n))."""
    f = np.asarray(f)
    g = np.asarray(g)
    if f.shape != g.shape:
        raise InvalidDimensionError(f"shape mismatch: {f.shape} vs {g.shape}")
    return complex(grid.h * np.sum(f * convolve_pair(grid, v, g.conj())))


def pair_convolutions(grid: Grid, v: PairPotential, Phi: OrbitalSet) -> np.ndarray:
    """conv[x, k, l] = (phi_k conj(phi_l) * v)(x)."""
    rho = np.einsum("xk,xl->xkl", Phi, Phi.conj())
    return convolve_pair(grid, v, rho)


def interaction_tensor(Phi: OrbitalSet, grid: Grid, v: PairPotential) -> np.ndarray:
    """V[k, l, i, j] = D_v(phi_i conj(phi_k), conj(phi_j) phi_l) = <phi_k phi_l | v | phi_i phi_j>."""
    conv = pair_convolutions(grid, v, Phi)
    return grid.h * np.einsum("xi,xk,xjl->klij", Phi, Phi.conj(), conv, optimize=True)


def K_matrix(Phi: OrbitalSet, table: ConfigTable, grid: Grid, v: PairPotential) -> np.ndarray:
    """K[sigma, tau] = <V Phi_tau | Phi_sigma>."""
    if v.is_zero:
        return np.zeros((table.r, table.r), dtype=complex)
    P = pair_tensor(table)
    V = interaction_tensor(Phi, grid, v)
    return 0.5 * np.einsum("rkls,rijt,klij->st", P, P, V, optimize=True)


def W_matrix(C: np.ndarray, Phi: OrbitalSet, table: ConfigTable, grid: Grid, v: PairPotential) -> np.ndarray:
    """W[i, j, x] = 2 sum_kl gamma_jkil (phi_k conj(phi_l) * v)(x)."""
    if v.is_zero:
        return np.zeros((table.K, table.K, grid.L), dtype=complex)
    g2 = gamma2(C, table).entries
    conv = pair_convolutions(grid, v, Phi)
    return 2.0 * np.einsum("jkil,xkl->ijx", g2, conv, optimize=True)


def apply_W(Wop: np.ndarray, Phi: OrbitalSet) -> np.ndarray:
    """(W Phi)_i = sum_j W_ij phi_j, returned as an (L, K) orbital set."""
    return np.einsum("ijx,xj->xi", Wop, Phi)


def mean_field(C: np.ndarray, Phi: OrbitalSet, table: ConfigTable, grid: Grid, v: PairPotential) -> MeanFieldData:
    return MeanFieldData(
        Kmat=K_matrix(Phi, table, grid, v),
        Wop=W_matrix(C, Phi, table, grid, v),
        orthonormal=gram_deviation(grid, Phi) <= ORTHONORMAL_TOL,
    )


def project_out(grid: Grid, Phi: OrbitalSet, f: np.ndarray) -> np.ndarray:
    """(I - P_Phi) f; f may be a single orbital or an (L, M) stack."""
    return f - Phi @ (grid.h * (Phi.conj().T @ f))


def onebody_matrix(Phi: OrbitalSet, H: OneBodyOperator, grid: Grid, t: float = 0.0) -> np.ndarray:
    """hmat[a, b] = <H phi_b, phi_a>."""
    return grid.h * (Phi.conj().T @ H.apply(Phi, t))


def configuration_hamiltonian(
    Phi: OrbitalSet, H: OneBodyOperator, grid: Grid, v: PairPotential, table: ConfigTable, t: float = 0.0
) -> np.ndarray:
    return one_body_config_matrix(onebody_matrix(Phi, H, grid, t), table) + K_matrix(Phi, table, grid, v)


def energy(
    C: np.ndarray, Phi: OrbitalSet, H: OneBodyOperator, grid: Grid, v: PairPotential, table: ConfigTable, t: float = 0.0
) -> float:
    """sum gamma_ij <H phi_i, phi_j> + 1/2 (W Phi, Phi)."""
    Gamma = gamma1_matrix(C, table)
    one = np.sum(Gamma * onebody_matrix(Phi, H, grid, t))
    WPhi = apply_W(W_matrix(C, Phi, table, grid, v), Phi)
    two = grid.h * np.sum(WPhi * Phi.conj())
    return float((one + 0.5 * two).real)


def energy_expanded(
    C: np.ndarray, Phi: OrbitalSet, H: OneBodyOperator, grid: Grid, v: PairPotential, table: ConfigTable, t: float = 0.0
) -> float:
    """One-body sum plus sum gamma_ijkl D_v(phi_i conj(phi_k), conj(phi_j) phi_l)."""
    Gamma = gamma1_matrix(C, table)
    one = np.sum(Gamma * onebody_matrix(Phi, H, grid, t))
    two = np.einsum("ijkl,klij->", gamma2(C, table).entries, interaction_tensor(Phi, grid, v))
    return float((one + two).real)


def fock_operator(Phi: OrbitalSet, grid: Grid, v: PairPotential) -> Callable[[np.ndarray], np.ndarray]:
    """F w = (sum_j v * |phi_j|^2) w - sum_j (v * conj(phi_j) w) phi_j."""
    Phi = np.asarray(Phi)
    direct = convolve_pair(grid, v, np.sum(np.abs(Phi) ** 2, axis=1))

    def apply(w: np.ndarray) -> np.ndarray:
        w = np.asarray(w)
        single = w.ndim == 1
        W = w[:, None] if single else w
        exchange = np.einsum("xjm,xj->xm", convolve_pair(grid, v, Phi.conj()[:, :, None] * W[:, None, :]), Phi)
        out = direct[:, None] * W - exchange
        return out[:, 0] if single else out

    return apply
