"""Ground levels I(K) of the MCHF energy and the global-existence criterion.

The minimizer alternates an exact CI step (lowest eigenvector of the
configuration Hamiltonian for fixed orbitals) with a preconditioned
projected-gradient step on the orbitals, retracted onto orthonormal frames
by Lowdin orthonormalization and accepted under the Armijo sufficient-decrease
rule.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Union

import numpy as np
from scipy import linalg

from sim.configs import enumerate_configs, is_admissible
from sim.density import gamma1_matrix
from sim.errors import InadmissibleError, InvalidDimensionError
from sim.grid import Grid, OneBodyOperator, PairPotential, lowdin_orthonormalize, one_body_eigenstates, random_orbitals
from sim.logger import TraceLogger
from sim.meanfield import W_matrix, apply_W, configuration_hamiltonian, project_out
from sim.propagation import MCProblem, MCState

VERDICTS = ("guaranteed-global", "inconclusive")
ARMIJO_C = 1e-4


@dataclass
class StationaryResult:
    state: MCState
    energy: float
    lam: float
    Lambda: np.ndarray
    el_residuals: tuple
    iterations: int
    converged: bool
    stalled: bool = False
    seed: Optional[int] = None
    history: List[float] = field(default_factory=list, repr=False)

    @property
    def K(self) -> int:
        return self.state.Phi.shape[1]

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "energy": self.energy,
            "lambda": self.lam,
            "Lambda": {"real": self.Lambda.real.tolist(), "imag": self.Lambda.imag.tolist()},
            "el_residuals": {"coefficients": self.el_residuals[0], "orbitals": self.el_residuals[1]},
            "iterations": self.iterations,
            "converged": self.converged,
            "stalled": self.stalled,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class CriterionReport:
    verdict: str
    level_K: float
    level_below: Optional[float]
    K_below: Optional[int]
    warning: Optional[str] = None


def _orbital_norm(grid: Grid, F: np.ndarray) -> float:
    return float(np.sqrt(grid.h * np.sum(np.abs(F) ** 2)))


def energy_gradient(C: np.ndarray, Phi: np.ndarray, problem: MCProblem) -> np.ndarray:
    """G = Gamma H Phi + W Phi, i.e. G_k = sum_j Gamma_kj H phi_j + (W Phi)_k."""
    Gamma = gamma1_matrix(C, problem.table)
    WPhi = apply_W(W_matrix(C, Phi, problem.table, problem.grid, problem.v), Phi)
    return problem.H.apply(Phi) @ Gamma.T + WPhi


def multipliers(C: np.ndarray, Phi: np.ndarray, problem: MCProblem):
    """lambda = <grad_C E, C>, Lambda_ij = <G_i, phi_j>, and both Euler-Lagrange residual norms."""
    grid = problem.grid
    Hconf = configuration_hamiltonian(Phi, problem.H, grid, problem.v, problem.table)
    HC = Hconf @ C
    lam = float(np.vdot(C, HC).real)
    G = energy_gradient(C, Phi, problem)
    Lambda = grid.h * (G.T @ Phi.conj())
    residuals = (
        float(np.linalg.norm(HC - lam * C)),
        _orbital_norm(grid, G - Phi @ Lambda.T),
    )
    return lam, Lambda, residuals


def sufficient_decrease(E: float, E_trial: float, s: float, slope: float, c: float = ARMIJO_C) -> bool:
    """Armijo test E(s) <= E(0) + c s dE/ds(0); slope < 0 along a descent direction."""
    return E_trial <= E + c * s * slope


def _config_energy(C, Phi, problem: MCProblem) -> float:
    Hconf = configuration_hamiltonian(Phi, problem.H, problem.grid, problem.v, problem.table)
    return float(np.vdot(C, Hconf @ C).real)


def _ci_step(Phi, problem: MCProblem):
    Hconf = configuration_hamiltonian(Phi, problem.H, problem.grid, problem.v, problem.table)
    w, V = linalg.eigh(Hconf)
    return V[:, 0], float(w[0])


def _initial_state(problem: MCProblem, init, seed) -> MCState:
    grid, K = problem.grid, problem.table.K
    if isinstance(init, MCState):
        return init
    if init == "random":
        Phi = random_orbitals(grid, K, np.random.default_rng(seed))
    elif init in (None, "eigen"):
        Phi = one_body_eigenstates(problem.H, K)[1].astype(complex)
    else:
        raise InvalidDimensionError(f"unknown initial state {init!r}")
    C = np.zeros(problem.table.r, dtype=complex)
    C[0] = 1.0
    return MCState(C=C, Phi=Phi)


def minimize_energy(
    problem: MCProblem,
    init: Union[MCState, str, None] = None,
    seed: Optional[int] = None,
    iterations: int = 500,
    step: float = 0.5,
    tol: float = 1e-7,
    epsilon: float = 1e-6,
    max_backtracks: int = 30,
    armijo: float = ARMIJO_C,
    logger: TraceLogger = None,
) -> StationaryResult:
    logger = logger or TraceLogger()
    grid, table = problem.grid, problem.table
    N, K = table.N, table.K
    if not is_admissible(N, K):
        raise InadmissibleError(f"(N={N}, K={K}) is not an admissible rank pair")
    if K > grid.L:
        raise InvalidDimensionError(f"K={K} orbitals exceed L={grid.L} grid points")

    state = _initial_state(problem, init, seed)
    Phi = np.array(state.Phi, dtype=complex)
    C, E = _ci_step(Phi, problem)
    history = [E]
    stalled = False
    converged = False
    n = 0
    for n in range(1, iterations + 1):
        G = project_out(grid, Phi, energy_gradient(C, Phi, problem))
        if _orbital_norm(grid, G) < tol:
            converged = True
            break
        Gamma = gamma1_matrix(C, table)
        directions = (
            ("preconditioned", -linalg.solve(Gamma + epsilon * np.eye(K), G.T, assume_a="her").T),
            ("gradient", -G),
        )
        accepted = False
        for name, D in directions:
            slope = 2.0 * float(np.real(grid.h * np.vdot(G, D)))
            s = step
            for _ in range(max_backtracks):
                trial = lowdin_orthonormalize(grid, Phi + s * D)
                E_trial = _config_energy(C, trial, problem)
                if sufficient_decrease(E, E_trial, s, slope, armijo):
                    accepted = True
                    break
                s *= 0.5
                logger.log("BACKTRACK", f"iteration={n} direction={name}", {"step": s})
            if accepted:
                break
        if not accepted:
            stalled = True
            logger.log("STALLED", f"iteration={n}", {"energy": E})
            break
        step = min(2.0 * s, 10.0)
        Phi = trial
        C, E = _ci_step(Phi, problem)
        history.append(E)
        logger.log("DESCENT", f"iteration={n}", {"energy": E, "step": s})

    lam, Lambda, residuals = multipliers(C, Phi, problem)
    converged = converged or residuals[1] < tol
    if converged:
        logger.log("CONVERGED", f"K={K}", {"energy": E, "iterations": n})
    return StationaryResult(
        state=MCState(C=C, Phi=Phi),
        energy=E,
        lam=lam,
        Lambda=Lambda,
        el_residuals=residuals,
        iterations=n,
        converged=converged,
        stalled=stalled,
        seed=seed,
        history=history,
    )


def nearest_admissible_below(N: int, K: int) -> Optional[int]:
    for candidate in range(K - 1, N - 1, -1):
        if is_admissible(N, candidate):
            return candidate
    return None


def _pad_state(previous: MCState, problem: MCProblem, previous_table) -> MCState:
    """Embed a rank-K' state into rank K: extra one-body eigenvectors, zero coefficients."""
    grid, table = problem.grid, problem.table
    Phi = np.array(previous.Phi, dtype=complex)
    _, candidates = one_body_eigenstates(problem.H, grid.L)
    for e in candidates.T:
        if Phi.shape[1] == table.K:
            break
        r = project_out(grid, Phi, e.astype(complex))
        norm = np.sqrt(grid.h) * np.linalg.norm(r)
        if norm > 0.1:
            Phi = np.column_stack([Phi, r / norm])
    Phi = lowdin_orthonormalize(grid, Phi)
    C = np.zeros(table.r, dtype=complex)
    for sigma, c in zip(previous_table.configs, previous.C):
        C[table.ordinal(sigma)] = c
    return MCState(C=C, Phi=Phi)


def ground_levels(
    N: int,
    k_list: Iterable[int],
    grid: Grid,
    H: OneBodyOperator,
    v: PairPotential,
    logger: TraceLogger = None,
    **options,
) -> Dict[int, StationaryResult]:
    """I(K) for each admissible K, each run warm-started from the previous one."""
    logger = logger or TraceLogger()
    results: Dict[int, StationaryResult] = {}
    previous = None
    previous_table = None
    for K in sorted(set(k_list)):
        table = enumerate_configs(N, K)
        problem = MCProblem(grid=grid, H=H, v=v, table=table)
        init = options.pop("init", None) if previous is None else _pad_state(previous, problem, previous_table)
        result = minimize_energy(problem, init=init, logger=logger, **options)
        logger.log("LEVEL", f"K={K}", {"energy": result.energy, "converged": result.converged})
        results[K] = result
        previous, previous_table = result.state, table
    return results


def existence_criterion(E0: float, level_K: float, level_below: Optional[float], K_below: Optional[int] = None, tol: float = 1e-10) -> CriterionReport:
    """guaranteed-global iff I(K) <= E0 < I(K'), K' the nearest admissible rank below K."""
    if E0 < level_K - tol:
        return CriterionReport(
            "inconclusive", level_K, level_below, K_below,
            warning=f"E0={E0:.10g} lies below the computed I(K)={level_K:.10g}; the minimizer did not converge",
        )
    if level_below is not None and E0 < level_below:
        return CriterionReport("guaranteed-global", level_K, level_below, K_below)
    return CriterionReport("inconclusive", level_K, level_below, K_below)
