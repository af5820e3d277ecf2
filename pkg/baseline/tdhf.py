"""Time-dependent Hartree-Fock, coded independently of the MCTDHF equations.

i dphi_i/dt = H phi_i + F_Phi phi_i for N orbitals, no projector and no
coefficient vector. Used as the K = N reference.
"""

import math

import numpy as np

from sim.grid import Grid, OneBodyOperator, PairPotential
from sim.meanfield import fock_operator


def tdhf_rhs(Phi: np.ndarray, H: OneBodyOperator, grid: Grid, v: PairPotential, t: float = 0.0) -> np.ndarray:
    F = fock_operator(Phi, grid, v)
    return -1j * (H.apply(Phi, t) + F(Phi))


def integrate_tdhf(
    Phi0: np.ndarray, H: OneBodyOperator, grid: Grid, v: PairPotential, dt: float, T: float
) -> np.ndarray:
    Phi = np.array(Phi0, dtype=complex)
    steps = max(int(math.ceil(T / dt - 1e-9)), 0)
    t = 0.0
    for n in range(steps):
        h = min(dt, T - t)
        k1 = tdhf_rhs(Phi, H, grid, v, t)
        k2 = tdhf_rhs(Phi + h / 2 * k1, H, grid, v, t + h / 2)
        k3 = tdhf_rhs(Phi + h / 2 * k2, H, grid, v, t + h / 2)
        k4 = tdhf_rhs(Phi + h * k3, H, grid, v, t + h)
        Phi = Phi + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return Phi


def hartree_fock_energy(Phi: np.ndarray, H: OneBodyOperator, grid: Grid, v: PairPotential, t: float = 0.0) -> float:
    """sum <H phi_i, phi_i> + 1/2 sum <F phi_i, phi_i>."""
    F = fock_operator(Phi, grid, v)
    one = grid.h * np.sum(H.apply(Phi, t) * Phi.conj())
    two = grid.h * np.sum(F(Phi) * Phi.conj())
    return float((one + 0.5 * two).real)
