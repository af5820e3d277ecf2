"""Desk-scale acceptance suites, runnable in one command.

Each check returns (passed, detail). Suites are registered by name; "all"
runs every suite in registration order.
"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple

import numpy as np
from scipy import linalg

from baseline.oracle import build_full_hamiltonian, compare, propagate_exact
from baseline.tdhf import integrate_tdhf
from sim.ansatz import configuration_basis, expand_full, orbital_derivative, orbital_gradient, reduced_density
from sim.configs import compound_matrix, enumerate_configs
from sim.density import gamma1, gamma1_matrix, gamma2, gamma2_contract, nonfreeness, occupations
from sim.grid import (
    build_grid,
    build_onebody,
    harmonic,
    inner,
    one_body_eigenstates,
    random_orbitals,
    soft_coulomb,
    zero_pair,
)
from sim.meanfield import K_matrix, W_matrix, apply_W, energy, project_out
from sim.propagation import GaugeSpec, MCProblem, MCState, Regularization, apply_gauge, integrate
from sim.stationary import existence_criterion, ground_levels

Check = Callable[[np.random.Generator], Tuple[bool, str]]

SUITES: Dict[str, List[Tuple[str, Check]]] = {}


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str


def _check(suite: str):
    def register(fn: Check) -> Check:
        SUITES.setdefault(suite, []).append((fn.__name__.lstrip("_"), fn))
        return fn

    return register


def _problem(N, K, L, h=0.6, interacting=True):
    grid = build_grid(L, h)
    H = build_onebody(grid, harmonic(1.0))
    v = soft_coulomb(grid) if interacting else zero_pair(grid)
    return MCProblem(grid=grid, H=H, v=v, table=enumerate_configs(N, K))


def _random_state(problem: MCProblem, rng) -> MCState:
    r = problem.table.r
    C = rng.standard_normal(r) + 1j * rng.standard_normal(r)
    return MCState(C=C / np.linalg.norm(C), Phi=random_orbitals(problem.grid, problem.table.K, rng))


def _mixed_state(problem: MCProblem, mix: float = 0.3) -> MCState:
    """Lowest eigenorbitals; first and last configuration with weights 1 - mix and mix."""
    C = np.zeros(problem.table.r, dtype=complex)
    C[0], C[-1] = np.sqrt(1.0 - mix), np.sqrt(mix)
    return MCState(C=C, Phi=one_body_eigenstates(problem.H, problem.table.K)[1].astype(complex))


def _psi(state: MCState, problem: MCProblem):
    return expand_full(state.C, state.Phi, problem.table, problem.grid)


def _random_unitary(K, rng):
    Z = rng.standard_normal((K, K)) + 1j * rng.standard_normal((K, K))
    return linalg.qr(Z)[0]


# ---------------------------------------------------------------------------
# algebra
# ---------------------------------------------------------------------------

@_check("algebra")
def _density_properties(rng):
    worst = 0.0
    for N, K in ((2, 4), (3, 5), (2, 6)):
        table = enumerate_configs(N, K)
        for _ in range(1000):
            C = rng.standard_normal(table.r) + 1j * rng.standard_normal(table.r)
            C /= np.linalg.norm(C)
            G = gamma1(C, table).entries
            w = linalg.eigvalsh(G)
            g2 = gamma2(C, table).entries
            worst = max(
                worst,
                float(np.max(np.abs(G - G.conj().T))),
                abs(np.trace(G).real - N),
                max(-w[0], w[-1] - 1.0, 0.0),
                float(np.max(np.abs(gamma2_contract(g2, N) - G.T))),
                float(np.max(np.abs(g2 + g2.transpose(1, 0, 2, 3)))),
                float(np.max(np.abs(g2 - g2.transpose(2, 3, 0, 1).conj()))),
            )
    return worst <= 1e-12, f"max deviation {worst:.2e}"


@_check("algebra")
def _compound_homomorphism(rng):
    table = enumerate_configs(3, 5)
    U, V = _random_unitary(5, rng), _random_unitary(5, rng)
    dU, dV = compound_matrix(U, table), compound_matrix(V, table)
    hom = float(np.max(np.abs(compound_matrix(U @ V, table).entries - dU.entries @ dV.entries)))
    dev = max(hom, dU.unitarity_deviation())
    return dev <= 1e-12, f"max deviation {dev:.2e}"


# ---------------------------------------------------------------------------
# oracle
# ---------------------------------------------------------------------------

@_check("oracle")
def _oracle_consistency(rng):
    problem = _problem(2, 3, 6)
    grid, table = problem.grid, problem.table
    Hfull = build_full_hamiltonian(grid, problem.H, problem.v, 2)
    worst = 0.0
    for _ in range(100):
        s = _random_state(problem, rng)
        psi = _psi(s, problem)
        G = reduced_density(psi, 1)
        Gamma = gamma1_matrix(s.C, table)
        B = configuration_basis(s.Phi, grid, table)
        VB = Hfull.interaction[:, None] * B
        WPhi = apply_W(W_matrix(s.C, s.Phi, table, grid, problem.v), s.Phi)
        adj = orbital_gradient(s.C, s.Phi, Hfull.apply_interaction(psi), table, grid)
        worst = max(
            worst,
            float(np.max(np.abs(G - grid.h * s.Phi @ Gamma.T @ s.Phi.conj().T))),
            abs(energy(s.C, s.Phi, problem.H, grid, problem.v, table) - Hfull.expectation(psi)),
            float(np.max(np.abs(K_matrix(s.Phi, table, grid, problem.v) - B.conj().T @ VB))),
            float(np.max(np.abs(adj - WPhi))),
        )
    return worst <= 1e-10, f"max deviation {worst:.2e}"


# ---------------------------------------------------------------------------
# gauge
# ---------------------------------------------------------------------------

@_check("gauge")
def _fibration(rng):
    problem = _problem(3, 5, 8)
    grid, table = problem.grid, problem.table
    s = _random_state(problem, rng)
    U = _random_unitary(5, rng)
    moved = apply_gauge(U, s, table)
    invariance = compare(_psi(s, problem), _psi(moved, problem))[0]
    Gamma = gamma1_matrix(s.C, table)
    conj = float(np.max(np.abs(gamma1_matrix(moved.C, table) - U @ Gamma @ U.conj().T)))
    zeta = project_out(grid, s.Phi, rng.standard_normal(grid.L) + 0j)
    xi = project_out(grid, s.Phi, rng.standard_normal(grid.L) + 0j)
    metric = 0.0
    for k in range(table.K):
        dk = orbital_derivative(s.C, s.Phi, k, zeta, table, grid)
        for l in range(table.K):
            dl = orbital_derivative(s.C, s.Phi, l, xi, table, grid)
            metric = max(metric, abs(dk.inner(dl) - Gamma[l, k] * inner(grid, zeta, xi)))
    passed = invariance <= 1e-10 and conj <= 1e-12 and metric <= 1e-12
    return passed, f"pi {invariance:.2e}, Gamma {conj:.2e}, metric {metric:.2e}"


# ---------------------------------------------------------------------------
# dynamics
# ---------------------------------------------------------------------------

@_check("dynamics")
def _free_dynamics(rng):
    problem = _problem(2, 4, 8, interacting=False)
    s = _random_state(problem, rng)
    run = integrate(s, problem, scheme="strang-split", dt=0.01, T=1.0, diag_every=100)
    Hfull = build_full_hamiltonian(problem.grid, problem.H, problem.v, 2)
    dist = compare(_psi(run.final, problem), propagate_exact(_psi(s, problem), Hfull, 1.0))[0]
    dC = float(np.max(np.abs(run.final.C - s.C)))
    return dC <= 1e-10 and dist <= 1e-8, f"C drift {dC:.2e}, oracle distance {dist:.2e}"


@_check("dynamics")
def _conservation(rng):
    problem = _problem(2, 4, 16, h=0.5)
    run = integrate(_mixed_state(problem), problem, dt=1e-3, T=1.0, diag_every=100)
    e, c = run.diagnostics.energy_drift(), run.diagnostics.constraint_drift()
    return e <= 1e-6 and c <= 1e-8, f"energy drift {e:.2e}, constraint drift {c:.2e}"


@_check("dynamics")
def _rk4_order(rng):
    problem = _problem(2, 4, 4)
    s = _random_state(problem, rng)
    Hfull = build_full_hamiltonian(problem.grid, problem.H, problem.v, 2)
    exact = propagate_exact(_psi(s, problem), Hfull, 0.5)
    errors = [
        compare(_psi(integrate(s, problem, dt=dt, T=0.5, diag_every=1000).final, problem), exact)[0]
        for dt in (0.05, 0.025)
    ]
    ratio = errors[0] / errors[1]
    return 12.8 <= ratio <= 19.2, f"error ratio under dt halving {ratio:.2f}"


@_check("dynamics")
def _tdhf_reduction(rng):
    problem = _problem(2, 2, 10)
    s = MCState(C=np.ones(1, dtype=complex), Phi=one_body_eigenstates(problem.H, 2)[1].astype(complex))
    run = integrate(s, problem, dt=0.005, T=0.5, diag_every=100)
    Phi_hf = integrate_tdhf(s.Phi, problem.H, problem.grid, problem.v, 0.005, 0.5)
    fid = compare(_psi(run.final, problem), expand_full(s.C, Phi_hf, problem.table, problem.grid))[1]
    return fid >= 1 - 1e-6, f"fidelity {fid:.10f}"


@_check("dynamics")
def _exact_at_full_rank(rng):
    problem = _problem(2, 4, 4)
    s = _random_state(problem, rng)
    Hfull = build_full_hamiltonian(problem.grid, problem.H, problem.v, 2)
    run = integrate(s, problem, dt=0.005, T=0.5, diag_every=10, oracle=Hfull)
    dist = compare(_psi(run.final, problem), propagate_exact(_psi(s, problem), Hfull, 0.5))[0]
    bound = run.diagnostics.rows[-1]["residual_integral"]
    return dist <= 1e-6 and dist <= bound + 1e-6, f"distance {dist:.2e}, residual integral {bound:.2e}"


@_check("dynamics")
def _regularization_convergence(rng):
    problem = _problem(2, 4, 8)
    s0 = _mixed_state(problem)
    opts = dict(dt=0.01, T=0.2, diag_every=5)
    ref = integrate(s0, problem, **opts).snapshots
    eps = np.array([1e-2, 1e-3, 1e-4])
    dists = []
    for e in eps:
        snaps = integrate(s0, problem, regularization=Regularization(float(e)), **opts).snapshots
        dists.append(max(compare(_psi(a, problem), _psi(b, problem))[0] for a, b in zip(ref, snaps)))
    slope = float(np.polyfit(np.log(eps), np.log(dists), 1)[0])
    return slope >= 0.9, f"log-log slope {slope:.3f}"


@_check("dynamics")
def _natural_gauge_invariance(rng):
    problem = _problem(3, 6, 10)
    s = _random_state(problem, rng)
    ref = integrate(s, problem, dt=1e-3, T=0.1, diag_every=100)
    nat = integrate(s, problem, dt=1e-3, T=0.1, diag_every=100, gauge=GaugeSpec("natural"))
    dist = compare(_psi(ref.final, problem), _psi(nat.final, problem))[0]
    G = gamma1_matrix(nat.final.C, problem.table)
    off = float(np.max(np.abs(G - np.diag(np.diag(G)))))
    return dist <= 1e-6 and off <= 1e-8, f"distance {dist:.2e}, off-diagonal Gamma {off:.2e}"


# ---------------------------------------------------------------------------
# levels
# ---------------------------------------------------------------------------

@_check("levels")
def _ground_levels(rng):
    problem = _problem(2, 6, 6)
    levels = ground_levels(2, (2, 4, 6), problem.grid, problem.H, problem.v)
    exact = build_full_hamiltonian(problem.grid, problem.H, problem.v, 2).ground_energy()
    I = [levels[k].energy for k in (2, 4, 6)]
    report = existence_criterion(I[2], I[2], I[1], 4)
    monotone = all(b <= a + 1e-10 for a, b in zip(I, I[1:]))
    ok = abs(I[2] - exact) <= 1e-6 and monotone and (I[1] - I[2] <= 1e-6 or report.verdict == "guaranteed-global")
    return ok, f"I(K) = {', '.join(f'{x:.8f}' for x in I)}, exact {exact:.8f}, {report.verdict}"


# ---------------------------------------------------------------------------
# nonfreeness
# ---------------------------------------------------------------------------

@_check("nonfreeness")
def _nonfreeness(rng):
    table = enumerate_configs(2, 4)
    slater = np.zeros(table.r, dtype=complex)
    slater[0] = 1.0
    mixed = np.zeros(table.r, dtype=complex)
    mixed[0] = mixed[-1] = np.sqrt(0.5)
    s0 = nonfreeness(occupations(gamma1_matrix(slater, table))[0])
    s1 = nonfreeness(occupations(gamma1_matrix(mixed, table))[0])
    return abs(s0) <= 1e-12 and s1 >= 1e-6, f"Slater {s0:.2e}, two-configuration {s1:.4f}"


# ---------------------------------------------------------------------------

def suite_names() -> Tuple[str, ...]:
    return tuple(SUITES) + ("all",)


def run_suite(name: str, seed: int = 0) -> List[CheckResult]:
    if name == "all":
        return [r for suite in SUITES for r in run_suite(suite, seed)]
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; expected one of {suite_names()}")
    results = []
    for check_name, fn in SUITES[name]:
        passed, detail = fn(np.random.default_rng(seed))
        results.append(CheckResult(name, check_name, bool(passed), detail))
    return results


def format_report(results: List[CheckResult]) -> str:
    lines = [f"[{'PASS' if r.passed else 'FAIL'}] {r.suite}/{r.name}: {r.detail}" for r in results]
    failed = sum(not r.passed for r in results)
    lines.append(f"{len(results) - failed} passed, {failed} failed")
    return "\n".join(lines)
