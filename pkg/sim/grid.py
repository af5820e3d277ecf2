"""The discrete one-body space: grid, one-body Hamiltonian, pair potential.

Orbital sets are plain complex arrays of shape (L, K); column k holds the
grid values of phi_k. All inner products carry the grid weight h:
<f, g> = h * sum(f * conj(g)).
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy import linalg

from sim.errors import InvalidDimensionError, RankDeficiencyError

BOUNDARIES = ("dirichlet", "periodic")

# (L, K) complex array; column k = phi_k on the grid
OrbitalSet = np.ndarray


@dataclass(frozen=True)
class Grid:
    """Uniform grid centered at the origin."""

    L: int
    h: float
    boundary: str
    points: np.ndarray = field(repr=False, compare=False)

    def distance_index(self) -> np.ndarray:
        """Integer distance |m - n| (minimum image when periodic)."""
        m = np.arange(self.L)
        d = np.abs(m[:, None] - m[None, :])
        if self.boundary == "periodic":
            d = np.minimum(d, self.L - d)
        return d


def build_grid(L: int, h: float, boundary: str = "dirichlet") -> Grid:
    if int(L) != L or L < 2:
        raise InvalidDimensionError(f"grid needs L >= 2 points, got L={L}")
    if not h > 0:
        raise InvalidDimensionError(f"grid spacing must be positive, got h={h}")
    if boundary not in BOUNDARIES:
        raise InvalidDimensionError(f"unknown boundary {boundary!r}; expected one of {BOUNDARIES}")
    L = int(L)
    points = (np.arange(1, L + 1) - (L + 1) / 2.0) * h
    return Grid(L=L, h=float(h), boundary=boundary, points=points)


def inner(grid: Grid, f: np.ndarray, g: np.ndarray) -> complex:
    return complex(grid.h * np.vdot(g, f))


def gram(grid: Grid, Phi: OrbitalSet) -> np.ndarray:
    """S[i, j] = <phi_j, phi_i>."""
    return grid.h * (Phi.conj().T @ Phi)


def orbital_norms(grid: Grid, Phi: OrbitalSet) -> np.ndarray:
    return np.sqrt(grid.h * np.sum(np.abs(Phi) ** 2, axis=0))


def gram_deviation(grid: Grid, Phi: OrbitalSet) -> float:
    S = gram(grid, Phi)
    return float(np.max(np.abs(S - np.eye(S.shape[0]))))


# ---------------------------------------------------------------------------
# Time-dependent coefficients
# ---------------------------------------------------------------------------

WAVEFORMS = ("constant", "gaussian-sine", "ramp")


@dataclass(frozen=True)
class Waveform:
    """Scalar control t -> value; `gaussian-sine` is A0 exp(-(t/tau)^2) sin(alpha t)."""

    kind: str = "constant"
    value: float = 0.0
    amplitude: float = 0.0
    tau: float = 1.0
    frequency: float = 1.0
    start: float = 0.0
    end: float = 0.0
    duration: float = 1.0

    def __post_init__(self):
        if self.kind not in WAVEFORMS:
            raise InvalidDimensionError(f"unknown waveform {self.kind!r}; expected one of {WAVEFORMS}")
        if self.kind == "gaussian-sine" and not self.tau > 0:
            raise InvalidDimensionError("gaussian-sine waveform needs tau > 0")
        if self.kind == "ramp" and not self.duration > 0:
            raise InvalidDimensionError("ramp waveform needs duration > 0")

    def __call__(self, t: float) -> float:
        if self.kind == "constant":
            return float(self.value)
        if self.kind == "gaussian-sine":
            return float(self.amplitude * np.exp(-((t / self.tau) ** 2)) * np.sin(self.frequency * t))
        s = min(max(t / self.duration, 0.0), 1.0)
        return float(self.start + (self.end - self.start) * s)

    @property
    def is_static(self) -> bool:
        return self.kind == "constant" or (self.kind == "ramp" and self.start == self.end)


@dataclass(frozen=True)
class Laser:
    """omega(t) scales the external potential, A(t) is the vector potential."""

    omega: Waveform = Waveform(kind="constant", value=1.0)
    vector_potential: Waveform = Waveform(kind="constant", value=0.0)


# ---------------------------------------------------------------------------
# One-body operator
# ---------------------------------------------------------------------------

def _stencils(grid: Grid):
    L = grid.L
    lap = np.zeros((L, L))
    der = np.zeros((L, L))
    for m in range(L):
        lap[m, m] -= 2.0
        for step, sign in ((1, 1.0), (-1, -1.0)):
            n = m + step
            if grid.boundary == "periodic":
                n %= L
            elif not 0 <= n < L:
                continue
            lap[m, n] += 1.0
            der[m, n] += sign
    return lap / grid.h ** 2, der / (2.0 * grid.h)


@dataclass
class OneBodyOperator:
    """H(t) = k (i d/dx + A(t))^2 + omega(t) U(x), k = 1/2 unless half_kinetic is off.

    With no laser this is -k Laplacian + U, the static one-body Hamiltonian.
    """

    grid: Grid
    potential: np.ndarray
    laser: Optional[Laser] = None
    half_kinetic: bool = True
    laplacian: np.ndarray = field(init=False, repr=False)
    derivative: np.ndarray = field(init=False, repr=False)
    _static: Optional[np.ndarray] = field(default=None, init=False, repr=False)
    _eig: Optional[tuple] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.laplacian, self.derivative = _stencils(self.grid)

    @property
    def kinetic_factor(self) -> float:
        return 0.5 if self.half_kinetic else 1.0

    @property
    def is_static(self) -> bool:
        return self.laser is None or (
            self.laser.omega.is_static and self.laser.vector_potential.is_static
        )

    def kinetic(self) -> np.ndarray:
        return -self.kinetic_factor * self.laplacian

    def at(self, t: float = 0.0) -> np.ndarray:
        if self.laser is None:
            if self._static is None:
                self._static = (self.kinetic() + np.diag(self.potential)).astype(complex)
            return self._static
        A = self.laser.vector_potential(t)
        omega = self.laser.omega(t)
        k = self.kinetic_factor
        L = self.grid.L
        return (
            k * (-self.laplacian + 2j * A * self.derivative + A * A * np.eye(L))
            + omega * np.diag(self.potential)
        )

    def apply(self, Phi: np.ndarray, t: float = 0.0) -> np.ndarray:
        return self.at(t) @ Phi

    def eigh(self, t: float = 0.0):
        if self.is_static:
            if self._eig is None:
                self._eig = linalg.eigh(self.at(t))
            return self._eig
        return linalg.eigh(self.at(t))

    def propagator(self, dt: float, t: float = 0.0) -> np.ndarray:
        """exp(-i dt H(t)) by eigendecomposition."""
        w, V = self.eigh(t)
        return (V * np.exp(-1j * dt * w)) @ V.conj().T


PotentialSpec = Union[Callable[[np.ndarray], np.ndarray], np.ndarray, list]


def build_onebody(
    grid: Grid,
    external_potential: PotentialSpec = None,
    laser: Optional[Laser] = None,
    half_kinetic: bool = True,
) -> OneBodyOperator:
    if external_potential is None:
        samples = np.zeros(grid.L)
    elif callable(external_potential):
        samples = np.asarray(external_potential(grid.points), dtype=float)
    else:
        samples = np.asarray(external_potential, dtype=float)
    if samples.shape != (grid.L,):
        raise InvalidDimensionError(f"potential has shape {samples.shape}, expected ({grid.L},)")
    if not np.all(np.isfinite(samples)):
        raise InvalidDimensionError("external potential has non-finite samples")
    return OneBodyOperator(grid=grid, potential=samples, laser=laser, half_kinetic=half_kinetic)


def harmonic(omega: float = 1.0):
    return lambda x: 0.5 * omega ** 2 * x ** 2


def soft_coulomb_well(charge: float = 1.0, softening: float = 1.0, center: float = 0.0):
    return lambda x: -charge / np.sqrt((x - center) ** 2 + softening ** 2)


def one_body_eigenstates(H: OneBodyOperator, count: int, t: float = 0.0):
    """Lowest `count` eigenpairs; eigenvectors are h-normalized orbitals."""
    w, V = H.eigh(t)
    return w[:count], V[:, :count] / np.sqrt(H.grid.h)


def random_orbitals(grid: Grid, K: int, rng: np.random.Generator) -> OrbitalSet:
    if K > grid.L:
        raise InvalidDimensionError(f"cannot fit K={K} orthonormal orbitals on L={grid.L} points")
    Z = rng.standard_normal((grid.L, K)) + 1j * rng.standard_normal((grid.L, K))
    Q, _ = linalg.qr(Z, mode="economic")
    return Q / np.sqrt(grid.h)


# ---------------------------------------------------------------------------
# Pair potential and convolution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PairPotential:
    """v sampled at grid distances d = k h, k = 0..L-1."""

    samples: np.ndarray
    nonneg: bool = False

    def __post_init__(self):
        s = np.asarray(self.samples)
        if np.iscomplexobj(s) or not np.all(np.isfinite(s)):
            raise InvalidDimensionError("pair potential samples must be finite and real")
        if self.nonneg and np.any(s < 0):
            raise InvalidDimensionError("pair potential declared nonnegative has negative samples")

    @property
    def is_zero(self) -> bool:
        return not np.any(self.samples)

    def matrix(self, grid: Grid) -> np.ndarray:
        if len(self.samples) != grid.L:
            raise InvalidDimensionError(
                f"pair potential has {len(self.samples)} samples, grid has L={grid.L}"
            )
        return np.asarray(self.samples, dtype=float)[grid.distance_index()]


def pair_from_function(grid: Grid, fn: Callable[[np.ndarray], np.ndarray], nonneg: bool = False) -> PairPotential:
    d = np.arange(grid.L) * grid.h
    return PairPotential(samples=np.asarray(fn(d), dtype=float), nonneg=nonneg)


def soft_coulomb(grid: Grid, strength: float = 1.0, softening: float = 1.0) -> PairPotential:
    """v(d) = z / sqrt(d^2 + a^2)."""
    return pair_from_function(
        grid, lambda d: strength / np.sqrt(d ** 2 + softening ** 2), nonneg=strength >= 0
    )


def constant_pair(grid: Grid, strength: float = 1.0) -> PairPotential:
    return PairPotential(samples=np.full(grid.L, float(strength)), nonneg=strength >= 0)


def zero_pair(grid: Grid) -> PairPotential:
    return PairPotential(samples=np.zeros(grid.L), nonneg=True)


def convolve_pair(grid: Grid, v: PairPotential, f: np.ndarray) -> np.ndarray:
    """(f * v)(x_m) = h sum_n v(|x_m - x_n|) f(x_n); extra axes are batched."""
    f = np.asarray(f)
    if f.shape[:1] != (grid.L,):
        raise InvalidDimensionError(f"f has leading dimension {f.shape[:1]}, grid has L={grid.L}")
    out = grid.h * (v.matrix(grid) @ f.reshape(grid.L, -1))
    return out.reshape(f.shape)


# ---------------------------------------------------------------------------
# Orthonormalization
# ---------------------------------------------------------------------------

def lowdin_orthonormalize(grid: Grid, Phi: OrbitalSet, tol: float = 1e-10) -> OrbitalSet:
    """Phi S^{-1/2}: the orthonormal frame closest to Phi spanning the same subspace."""
    S = gram(grid, Phi)
    w, V = linalg.eigh(S)
    if w[0] <= tol * max(w[-1], 1.0):
        raise RankDeficiencyError(f"Gram matrix singular: smallest eigenvalue {w[0]:.3e}")
    return Phi @ ((V / np.sqrt(w)) @ V.conj().T)
