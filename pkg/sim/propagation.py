"""Time integration of the MCTDHF equations.

The state is (C, Phi, t). In a gauge X (K x K Hermitian, X_pq = i<dphi_p/dt, phi_q>)
the equations read

    i dC/dt   = (Hconf - M(X^T)) C
    i dPhi/dt = (I - P) H Phi + Gamma^{-1} (I - P) W Phi + Phi X^T

with M(.) the configuration-space lift of a one-body matrix. X = 0 is the
zero gauge; X = <H phi_p, phi_q> cancels the one-body part of Hconf and
gives the working equations.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Union

import numpy as np
from scipy import linalg
from scipy.interpolate import CubicSpline

from sim.ansatz import configuration_basis, expand_full, orbital_derivative, orbital_gradient
from sim.configs import ConfigTable, coeff_transform, hole_tensor, one_body_config_matrix
from sim.density import gamma1_matrix, nonfreeness, occupations, rank_diagnostics, regularize
from sim.errors import (
    DegenerateSpectrumError,
    IntegratorConfigError,
    IntegratorDivergedError,
    NonHermitianError,
    NonUnitaryError,
    OffDiagonalDensityError,
    SingularDensityError,
)
from sim.grid import Grid, OneBodyOperator, PairPotential, gram_deviation, lowdin_orthonormalize
from sim.logger import TraceLogger
from sim.meanfield import (
    K_matrix,
    W_matrix,
    apply_W,
    configuration_hamiltonian,
    energy,
    onebody_matrix,
    project_out,
)

SCHEMES = ("rk4", "strang-split")
GAUGE_MODES = ("zero", "onebody", "natural", "custom")
SINGULAR_TOL = 1e-10
GAP_TOL = 1e-6
NATURAL_TOL = 1e-2
HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-10
OCCUPATION_TOL = 1e-6


@dataclass(frozen=True)
class MCState:
    C: np.ndarray
    Phi: np.ndarray
    t: float = 0.0

    def replace(self, C=None, Phi=None, t=None) -> "MCState":
        return MCState(
            C=self.C if C is None else C,
            Phi=self.Phi if Phi is None else Phi,
            t=self.t if t is None else t,
        )


@dataclass(frozen=True)
class MCProblem:
    """Everything the equations need besides the state."""

    grid: Grid
    H: OneBodyOperator
    v: PairPotential
    table: ConfigTable


@dataclass(frozen=True)
class Regularization:
    epsilon: float
    mode: str = "shift"


@dataclass(frozen=True)
class GaugeSpec:
    mode: str = "onebody"
    matrix: Union[None, np.ndarray, Callable[[float], np.ndarray]] = None

    def __post_init__(self):
        if self.mode not in GAUGE_MODES:
            raise IntegratorConfigError(f"unknown gauge {self.mode!r}; expected one of {GAUGE_MODES}")
        if self.mode == "custom" and self.matrix is None:
            raise IntegratorConfigError("custom gauge needs a matrix or a callable M(t)")

    def custom_at(self, t: float) -> np.ndarray:
        M = self.matrix(t) if callable(self.matrix) else self.matrix
        M = np.asarray(M, dtype=complex)
        if np.max(np.abs(M - M.conj().T)) > HERMITIAN_TOL:
            raise NonHermitianError(f"gauge matrix is not Hermitian at t={t:.6g}")
        return M


# ---------------------------------------------------------------------------
# Right-hand sides
# ---------------------------------------------------------------------------

def _inverse_gamma_apply(Gamma, Z, regularization: Optional[Regularization], singular_tol: float):
    """Y with Y[:, i] = sum_j (Gamma^{-1})_ij Z[:, j]."""
    if regularization is not None:
        G = regularize(Gamma, regularization.epsilon, regularization.mode)
    else:
        mu = float(linalg.eigvalsh(Gamma)[0])
        if mu < singular_tol:
            raise SingularDensityError(mu)
        G = Gamma
    return linalg.solve(G, Z.T, assume_a="her").T


def nonlinear_orbital_term(
    state: MCState,
    problem: MCProblem,
    regularization: Optional[Regularization] = None,
    singular_tol: float = SINGULAR_TOL,
) -> np.ndarray:
    """Gamma^{-1} (I - P) W Phi, zero when the pair potential vanishes."""
    if problem.v.is_zero:
        return np.zeros_like(state.Phi, dtype=complex)
    C, Phi = state.C, state.Phi
    Gamma = gamma1_matrix(C, problem.table)
    WPhi = apply_W(W_matrix(C, Phi, problem.table, problem.grid, problem.v), Phi)
    Z = project_out(problem.grid, Phi, WPhi)
    return _inverse_gamma_apply(Gamma, Z, regularization, singular_tol)


def rhs_working(
    state: MCState,
    problem: MCProblem,
    regularization: Optional[Regularization] = None,
    singular_tol: float = SINGULAR_TOL,
):
    """dC/dt = -i K C, dPhi/dt = -i (H Phi + Gamma^{-1} (I - P) W Phi)."""
    Y = nonlinear_orbital_term(state, problem, regularization, singular_tol)
    dC = -1j * (K_matrix(state.Phi, problem.table, problem.grid, problem.v) @ state.C)
    dPhi = -1j * (problem.H.apply(state.Phi, state.t) + Y)
    return dC, dPhi


def rhs_gauge(
    state: MCState,
    problem: MCProblem,
    X: np.ndarray,
    regularization: Optional[Regularization] = None,
    singular_tol: float = SINGULAR_TOL,
):
    grid, table = problem.grid, problem.table
    Y = nonlinear_orbital_term(state, problem, regularization, singular_tol)
    Hconf = configuration_hamiltonian(state.Phi, problem.H, grid, problem.v, table, state.t)
    dC = -1j * ((Hconf - one_body_config_matrix(X.T, table)) @ state.C)
    HPhi = problem.H.apply(state.Phi, state.t)
    dPhi = -1j * (project_out(grid, state.Phi, HPhi) + Y + state.Phi @ X.T)
    return dC, dPhi


def natural_gauge_M(
    state: MCState, problem: MCProblem, gap_tol: float = GAP_TOL, natural_tol: float = NATURAL_TOL
) -> np.ndarray:
    """Gauge matrix keeping Gamma diagonal: X_ij = A_ij / (g_j - g_i), zero diagonal,
    where A_ij = C^* [Hconf, E_ij] C and g = diag(Gamma).

    The orbitals must already be natural orbitals: an off-diagonal part of
    Gamma above `natural_tol` raises OffDiagonalDensityError.
    """
    table = problem.table
    C = state.C
    Gamma = gamma1_matrix(C, table)
    offdiag = float(np.max(np.abs(Gamma - np.diag(np.diag(Gamma)))))
    if offdiag > natural_tol:
        raise OffDiagonalDensityError(offdiag)
    g = np.real(np.diag(Gamma))
    diff = g[None, :] - g[:, None]
    off = ~np.eye(table.K, dtype=bool)
    if table.K > 1:
        gap = float(np.min(np.abs(diff[off])))
        if gap < gap_tol:
            raise DegenerateSpectrumError(gap)
    Hconf = configuration_hamiltonian(state.Phi, problem.H, problem.grid, problem.v, table, state.t)
    A = hole_tensor(table)
    XC = A @ C
    XU = A @ (Hconf @ C)
    comm = XU.conj().T @ XC - XC.conj().T @ XU
    X = np.zeros((table.K, table.K), dtype=complex)
    X[off] = comm[off] / diff[off]
    return X


def gauge_matrix(state: MCState, problem: MCProblem, gauge: GaugeSpec, gap_tol: float = GAP_TOL) -> np.ndarray:
    if gauge.mode == "zero":
        return np.zeros((problem.table.K, problem.table.K), dtype=complex)
    if gauge.mode == "onebody":
        return onebody_matrix(state.Phi, problem.H, problem.grid, state.t).T
    if gauge.mode == "natural":
        return natural_gauge_M(state, problem, gap_tol)
    return gauge.custom_at(state.t)


# ---------------------------------------------------------------------------
# Gauge transforms
# ---------------------------------------------------------------------------

def apply_gauge(U: np.ndarray, state: MCState, table: ConfigTable) -> MCState:
    """Phi' = U.Phi (phi'_i = sum_j U_ij phi_j), C' = conj(d(U)) C."""
    transformed = coeff_transform(U, state.C, table)
    if not transformed.unitary:
        raise NonUnitaryError(f"gauge transform deviates from unitary by {transformed.deviation:.3e}")
    return state.replace(C=transformed.values, Phi=state.Phi @ np.asarray(U).T)


def natural_rotation(state: MCState, table: ConfigTable) -> np.ndarray:
    """U with U Gamma U^* diagonal, occupations descending."""
    _, V = occupations(gamma1_matrix(state.C, table))
    return V.conj().T


@dataclass(frozen=True)
class GaugeTrajectory:
    times: np.ndarray
    unitaries: np.ndarray

    def at(self, t: float) -> np.ndarray:
        n = int(np.argmin(np.abs(self.times - t)))
        return self.unitaries[n]


def _hermitian_at(M, t: float) -> np.ndarray:
    value = np.asarray(M(t) if callable(M) else M, dtype=complex)
    if np.max(np.abs(value - value.conj().T)) > HERMITIAN_TOL:
        raise NonHermitianError(f"gauge generator is not Hermitian at t={t:.6g}")
    return value


def gauge_transport(M, U0: np.ndarray, dt: float, T: float) -> GaugeTrajectory:
    """Solve i dU/dt = U M(t) by rk4 with polar re-unitarization after each step."""
    if not dt > 0:
        raise IntegratorConfigError(f"dt must be positive, got {dt}")
    steps = max(int(math.ceil(T / dt - 1e-9)), 0)
    U = np.array(U0, dtype=complex)
    times = [0.0]
    samples = [U.copy()]
    t = 0.0
    for n in range(steps):
        h = min(dt, T - t)

        def f(s, V):
            return -1j * (V @ _hermitian_at(M, s))

        k1 = f(t, U)
        k2 = f(t + h / 2, U + h / 2 * k1)
        k3 = f(t + h / 2, U + h / 2 * k2)
        k4 = f(t + h, U + h * k3)
        U = U + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        U = linalg.polar(U)[0]
        t = (n + 1) * dt if n + 1 < steps else T
        times.append(t)
        samples.append(U.copy())
    return GaugeTrajectory(times=np.array(times), unitaries=np.array(samples))


def interpolate_gauge(times, matrices) -> Callable[[float], np.ndarray]:
    """Cubic-spline interpolation of K x K matrices sampled along a trajectory."""
    stack = np.asarray(matrices, dtype=complex)
    re = CubicSpline(times, stack.real, axis=0)
    im = CubicSpline(times, stack.imag, axis=0)

    def M(t: float) -> np.ndarray:
        value = re(t) + 1j * im(t)
        return 0.5 * (value + value.conj().T)

    return M


def onebody_gauge_samples(snapshots: List[MCState], problem: MCProblem):
    """Times and M_jk = -<H phi_j, phi_k> along a working-equation trajectory.

    Transporting by i dU/dt = U M(t) and applying U(t) to each snapshot maps
    the one-body gauge trajectory onto the zero-gauge one.
    """
    times = np.array([s.t for s in snapshots])
    mats = [-onebody_matrix(s.Phi, problem.H, problem.grid, s.t).T for s in snapshots]
    return times, mats


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------

DIAGNOSTIC_COLUMNS = (
    "t",
    "energy",
    "norm_C",
    "gram_dev",
    "mu",
    "inv_gamma_frob",
    "blowup_integral",
    "residual",
    "residual_integral",
    "nonfreeness",
)


@dataclass
class Diagnostics:
    rows: List[dict] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([row[name] for row in self.rows], dtype=float)

    def record(self, row: dict) -> dict:
        if self.rows:
            prev = self.rows[-1]
            dt = row["t"] - prev["t"]
            row["blowup_integral"] = prev["blowup_integral"] + 0.5 * dt * (
                prev["inv_gamma_frob"] ** 1.5 + row["inv_gamma_frob"] ** 1.5
            )
            row["residual_integral"] = prev["residual_integral"] + 0.5 * dt * (
                prev["residual"] + row["residual"]
            )
        else:
            row["blowup_integral"] = 0.0
            row["residual_integral"] = 0.0
        self.rows.append(row)
        return row

    def energy_drift(self) -> float:
        E = self.column("energy")
        if len(E) == 0:
            return 0.0
        scale = abs(E[0]) if abs(E[0]) > 0 else 1.0
        return float(np.max(np.abs(E - E[0])) / scale)

    def constraint_drift(self) -> float:
        if not self.rows:
            return 0.0
        return float(max(np.max(self.column("gram_dev")), np.max(np.abs(self.column("norm_C") - 1.0))))

    def summary(self) -> dict:
        last = self.rows[-1] if self.rows else {}
        return {
            "samples": len(self.rows),
            "energy_drift": self.energy_drift(),
            "constraint_drift": self.constraint_drift(),
            "min_mu": float(np.min(self.column("mu"))) if self.rows else float("nan"),
            "blowup_integral": last.get("blowup_integral", 0.0),
            "residual_integral": last.get("residual_integral", 0.0),
        }


def residual_bound(state: MCState, problem: MCProblem, oracle) -> float:
    """Norm of H_N Psi minus its projection on the tangent space of the ansatz at Psi.

    The tangent space is span{Phi_sigma} plus the orbital directions
    dPsi/dphi_k[zeta_k] with zeta_k orthogonal to span{Phi}; on the latter the
    metric is Gamma (x) <.,.>.
    """
    grid, table = problem.grid, problem.table
    C, Phi = state.C, state.Phi
    Gamma = gamma1_matrix(C, table)
    mu = float(linalg.eigvalsh(Gamma)[0])
    if mu < SINGULAR_TOL:
        raise SingularDensityError(mu)
    psi = expand_full(C, Phi, table, grid)
    X = oracle.apply(psi)
    B = configuration_basis(Phi, grid, table)
    R = X.amplitudes - B @ (B.conj().T @ X.amplitudes)
    G = project_out(grid, Phi, orbital_gradient(C, Phi, X, table, grid))
    Z = linalg.solve(Gamma, G.T, assume_a="her").T
    for k in range(table.K):
        R = R - orbital_derivative(C, Phi, k, Z[:, k], table, grid).amplitudes
    return float(np.linalg.norm(R))


def _diagnostic_row(state: MCState, problem: MCProblem, oracle=None) -> dict:
    Gamma = gamma1_matrix(state.C, problem.table)
    rank = rank_diagnostics(Gamma, SINGULAR_TOL)
    try:
        entropy = nonfreeness(rank.occupations, OCCUPATION_TOL)
    except ValueError:
        entropy = float("nan")
    residual = 0.0
    if oracle is not None and not rank.singular:
        residual = residual_bound(state, problem, oracle)
    return {
        "t": float(state.t),
        "energy": energy(state.C, state.Phi, problem.H, problem.grid, problem.v, problem.table, state.t),
        "norm_C": float(np.linalg.norm(state.C)),
        "gram_dev": gram_deviation(problem.grid, state.Phi),
        "mu": rank.mu,
        "inv_gamma_frob": rank.inv_frobenius,
        "residual": residual,
        "nonfreeness": entropy,
    }


# ---------------------------------------------------------------------------
# Integrators
# ---------------------------------------------------------------------------

@dataclass
class PropagationResult:
    status: str
    snapshots: List[MCState]
    diagnostics: Diagnostics
    final: MCState
    steps: int
    halt: Optional[dict] = None
    rotation: Optional[np.ndarray] = None


def _rk4(f, state: MCState, dt: float) -> MCState:
    t, C, Phi = state.t, state.C, state.Phi
    k1 = f(state)
    k2 = f(MCState(C + dt / 2 * k1[0], Phi + dt / 2 * k1[1], t + dt / 2))
    k3 = f(MCState(C + dt / 2 * k2[0], Phi + dt / 2 * k2[1], t + dt / 2))
    k4 = f(MCState(C + dt * k3[0], Phi + dt * k3[1], t + dt))
    return MCState(
        C=C + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
        Phi=Phi + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
        t=t + dt,
    )


def _step_function(problem, scheme, gauge, regularization, singular_tol, gap_tol):
    if scheme == "strang-split":

        def nonlinear(state):
            dC = -1j * (K_matrix(state.Phi, problem.table, problem.grid, problem.v) @ state.C)
            dPhi = -1j * nonlinear_orbital_term(state, problem, regularization, singular_tol)
            return dC, dPhi

        def step(state, dt):
            half = problem.H.propagator(dt / 2, state.t + dt / 2)
            moved = _rk4(nonlinear, state.replace(Phi=half @ state.Phi), dt)
            return moved.replace(Phi=half @ moved.Phi)

        return step

    if gauge.mode == "onebody":

        def f(state):
            return rhs_working(state, problem, regularization, singular_tol)

    else:

        def f(state):
            X = gauge_matrix(state, problem, gauge, gap_tol)
            return rhs_gauge(state, problem, X, regularization, singular_tol)

    return lambda state, dt: _rk4(f, state, dt)


def integrate(
    state0: MCState,
    problem: MCProblem,
    scheme: str = "rk4",
    dt: float = 1e-3,
    T: float = 1.0,
    gauge: GaugeSpec = GaugeSpec(),
    regularization: Optional[Regularization] = None,
    diag_every: int = 1,
    singular_tol: float = SINGULAR_TOL,
    gap_tol: float = GAP_TOL,
    reorthonormalize: bool = False,
    oracle=None,
    logger: TraceLogger = None,
) -> PropagationResult:
    """Fixed-step integration from state0.t to state0.t + T.

    Snapshots and diagnostics are taken at the start, every `diag_every`
    steps, and at the end. A singular density without regularization halts
    the run (status "halted") rather than raising.
    """
    logger = logger or TraceLogger()
    if scheme not in SCHEMES:
        raise IntegratorConfigError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    if not dt > 0 or T < 0:
        raise IntegratorConfigError(f"need dt > 0 and T >= 0, got dt={dt}, T={T}")
    if scheme == "strang-split" and gauge.mode != "onebody":
        raise IntegratorConfigError("strang-split integrates the working equations only (gauge 'onebody')")
    if diag_every < 1:
        raise IntegratorConfigError(f"diag_every must be >= 1, got {diag_every}")

    rotation = None
    state = MCState(C=np.array(state0.C, dtype=complex), Phi=np.array(state0.Phi, dtype=complex), t=float(state0.t))
    if gauge.mode == "natural":
        rotation = natural_rotation(state, problem.table)
        state = apply_gauge(rotation, state, problem.table)

    step = _step_function(problem, scheme, gauge, regularization, singular_tol, gap_tol)
    steps = max(int(math.ceil(T / dt - 1e-9)), 0)
    t_end = state.t + T
    diagnostics = Diagnostics()
    snapshots = []
    interacting = not problem.v.is_zero

    logger.log("RUN_START", f"scheme={scheme} gauge={gauge.mode}", {
        "dt": dt, "T": T, "steps": steps, "regularized": regularization is not None,
    })

    def sample(s):
        row = diagnostics.record(_diagnostic_row(s, problem, oracle))
        snapshots.append(s)
        logger.log("DIAG", f"t={s.t:.6g}", {"energy": row["energy"], "mu": row["mu"]})
        return row

    def halt(s, mu, n):
        if not snapshots or snapshots[-1] is not s:
            sample(s)
        info = {"t": s.t, "mu": mu, "step": n, "blowup_integral": diagnostics.rows[-1]["blowup_integral"]}
        logger.log("HALT", "singular density", info)
        logger.log("RUN_END", "status=halted")
        return PropagationResult("halted", snapshots, diagnostics, s, n, halt=info, rotation=rotation)

    row = sample(state)
    for n in range(steps):
        if interacting and regularization is None and row is not None and row["mu"] < singular_tol:
            return halt(state, row["mu"], n)
        h = min(dt, t_end - state.t) if n == steps - 1 else dt
        try:
            new = step(state, h)
        except SingularDensityError as exc:
            return halt(state, exc.mu, n)
        if not (np.all(np.isfinite(new.C)) and np.all(np.isfinite(new.Phi))):
            logger.log("HALT", "non-finite state", {"t": state.t, "step": n})
            raise IntegratorDivergedError(state)
        if reorthonormalize:
            new = new.replace(Phi=lowdin_orthonormalize(problem.grid, new.Phi))
        state = new
        row = None
        if (n + 1) % diag_every == 0 or n == steps - 1:
            row = sample(state)
        elif interacting and regularization is None:
            mu = float(linalg.eigvalsh(gamma1_matrix(state.C, problem.table))[0])
            row = {"mu": mu} if mu < singular_tol else None

    logger.log("RUN_END", "status=ok", diagnostics.summary())
    return PropagationResult("ok", snapshots, diagnostics, state, steps, rotation=rotation)
