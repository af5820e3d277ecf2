"""Deterministic execution engine for scenarios."""

import pathlib
import time

import numpy as np
from scipy import linalg

from baseline.oracle import build_full_hamiltonian
from sim import artifacts
from sim.configs import enumerate_configs
from sim.errors import IntegratorDivergedError, MCTDHFError, ScenarioError
from sim.grid import (
    Laser,
    PairPotential,
    build_grid,
    build_onebody,
    constant_pair,
    harmonic,
    one_body_eigenstates,
    random_orbitals,
    soft_coulomb,
    soft_coulomb_well,
    zero_pair,
)
from sim.logger import TraceLogger
from sim.meanfield import energy
from sim.propagation import GaugeSpec, MCProblem, MCState, Regularization, integrate
from sim.stationary import existence_criterion, ground_levels, minimize_energy, nearest_admissible_below

COMMANDS = ("run", "minimize", "levels")


def build_problem(config, K: int = None) -> MCProblem:
    """Grid, one-body operator, pair potential and configuration table of a scenario."""
    g = config.grid
    grid = build_grid(g.L, g.h, g.boundary)

    ext = config.external_potential
    if ext.kind == "harmonic":
        potential = harmonic(ext.omega)
    elif ext.kind == "soft-coulomb-well":
        potential = soft_coulomb_well(ext.charge, ext.softening, ext.center)
    elif ext.kind == "tabulated":
        potential = np.asarray(ext.samples, dtype=float)
    else:
        potential = None

    laser = None
    if config.laser is not None:
        laser = Laser(omega=config.laser.omega, vector_potential=config.laser.vector_potential)
    H = build_onebody(grid, potential, laser=laser, half_kinetic=config.half_kinetic)

    pair = config.pair_potential
    if pair.kind == "soft-coulomb":
        v = soft_coulomb(grid, pair.strength, pair.softening)
    elif pair.kind == "constant":
        v = constant_pair(grid, pair.strength)
    elif pair.kind == "tabulated":
        v = PairPotential(samples=np.asarray(pair.samples, dtype=float))
    else:
        v = zero_pair(grid)

    table = enumerate_configs(config.particles, config.orbitals if K is None else K)
    return MCProblem(grid=grid, H=H, v=v, table=table)


def build_initial_state(config, problem: MCProblem) -> MCState:
    init = config.initial_state
    grid, table = problem.grid, problem.table
    if init.kind == "file":
        state = artifacts.load_snapshot(init.path)
        if state.Phi.shape != (grid.L, table.K) or state.C.shape != (table.r,):
            raise ScenarioError(
                f"snapshot {init.path} holds C{state.C.shape}, Phi{state.Phi.shape}; "
                f"scenario needs C({table.r},), Phi({grid.L}, {table.K})"
            )
        return state
    if init.kind == "random":
        rng = np.random.default_rng(init.seed)
        Phi = random_orbitals(grid, table.K, rng)
        C = rng.standard_normal(table.r) + 1j * rng.standard_normal(table.r)
        return MCState(C=C / np.linalg.norm(C), Phi=Phi)
    # ground-state: lowest one-body eigenorbitals, first and last configuration mixed
    Phi = one_body_eigenstates(problem.H, table.K)[1].astype(complex)
    C = np.zeros(table.r, dtype=complex)
    C[0] = np.sqrt(1.0 - init.mix)
    C[-1] += np.sqrt(init.mix)
    return MCState(C=C / np.linalg.norm(C), Phi=Phi)


def gauge_spec(config) -> GaugeSpec:
    g = config.gauge
    matrix = None if g.matrix is None else np.asarray(g.matrix, dtype=complex)
    return GaugeSpec(mode=g.mode, matrix=matrix)


class Executor:
    """Runs scenarios and writes their artifacts.

    Supports an optional gate. If no gate is provided, every scenario is
    executed without admissibility checks; numerical errors still end up as
    a result dict with status "error".
    """

    def __init__(self, logger: TraceLogger = None, gate=None, output_root=None):
        self.logger = logger or TraceLogger()
        self.gate = gate
        self.output_root = pathlib.Path(output_root) if output_root is not None else None

    def output_dir(self, config) -> pathlib.Path:
        out = pathlib.Path(config.output)
        return self.output_root / out if self.output_root is not None else out

    def execute(self, config, command: str = "run", k_list=None) -> dict:
        """Execute one scenario command. Returns result dict."""
        if k_list is None and config.levels is not None:
            k_list = config.levels.k_list
        snapshot = {
            "command": command,
            "k_list": tuple(k_list or ()),
            "output": str(self.output_dir(config)),
        }

        if self.gate is not None:
            verdict, reasons = self.gate.decide(config, snapshot)
            self.logger.log("GATE", f"verdict={verdict}", {"scenario": config.name, "reasons": reasons})
            if verdict in ("HOLD", "DENY"):
                return {"status": "blocked", "verdict": verdict, "reasons": reasons}

        self.logger.log("EXEC_START", f"command={command} scenario={config.name}")
        started = time.perf_counter()
        try:
            if command == "run":
                result = self._do_run(config)
            elif command == "minimize":
                result = self._do_minimize(config)
            elif command == "levels":
                result = self._do_levels(config, k_list)
            else:
                result = {"status": "error", "reason": f"unknown command: {command}"}
        except IntegratorDivergedError as exc:
            self.logger.log("EXEC_ERROR", str(exc))
            result = {"status": "error", "reason": str(exc), "last_t": float(exc.last_snapshot.t)}
        except (MCTDHFError, linalg.LinAlgError) as exc:
            self.logger.log("EXEC_ERROR", str(exc))
            result = {"status": "error", "reason": str(exc)}

        wall = time.perf_counter() - started
        if result["status"] in ("ok", "halted"):
            self._write_common(config, command, result, wall)
        self.logger.log("EXEC_END", f"command={command} result={result['status']}")
        return result

    # ------------------------------------------------------------------

    def _do_run(self, config) -> dict:
        problem = build_problem(config)
        state0 = build_initial_state(config, problem)
        integ, diag = config.integrator, config.diagnostics
        oracle = None
        if diag.residual:
            oracle = build_full_hamiltonian(problem.grid, problem.H, problem.v, config.particles, diag.oracle_cap)
        reg = config.regularization
        run = integrate(
            state0,
            problem,
            scheme=integ.scheme,
            dt=integ.dt,
            T=integ.T,
            gauge=gauge_spec(config),
            regularization=None if reg is None else Regularization(reg.epsilon, reg.mode),
            diag_every=integ.diag_every,
            singular_tol=diag.singular_tol,
            gap_tol=diag.gap_tol,
            reorthonormalize=integ.reorthonormalize,
            oracle=oracle,
            logger=self.logger,
        )

        out = self.output_dir(config)
        csv_path = artifacts.write_diagnostics_csv(out / "diagnostics.csv", run.diagnostics)
        self.logger.log("ARTIFACT", str(csv_path))
        for n, snap in enumerate(run.snapshots):
            artifacts.write_snapshot(out / "snapshots" / f"snapshot_{n:04d}", snap)
        self.logger.log("ARTIFACT", str(out / "snapshots"), {"count": len(run.snapshots)})

        result = {
            "status": run.status,
            "steps": run.steps,
            "t_final": float(run.final.t),
            "summary": run.diagnostics.summary(),
        }
        if run.halt is not None:
            result["halt"] = run.halt
        return result

    def _do_minimize(self, config) -> dict:
        problem = build_problem(config)
        state0 = build_initial_state(config, problem)
        options = self._level_options(config)
        res = minimize_energy(problem, init=state0, seed=config.initial_state.seed, logger=self.logger, **options)
        artifacts.write_snapshot(self.output_dir(config) / "ground_state", res.state)
        self.logger.log("ARTIFACT", str(self.output_dir(config) / "ground_state"))
        return {"status": "ok", "minimum": res.to_dict()}

    def _do_levels(self, config, k_list) -> dict:
        N, K = config.particles, config.orbitals
        K_below = nearest_admissible_below(N, K)
        wanted = set(k_list) | {K} | ({K_below} if K_below is not None else set())
        problem = build_problem(config)
        H, grid = problem.H, problem.grid
        levels = ground_levels(N, sorted(wanted), grid, H, problem.v, logger=self.logger, **self._level_options(config))

        state0 = build_initial_state(config, problem)
        E0 = energy(state0.C, state0.Phi, H, grid, problem.v, problem.table)
        report = existence_criterion(
            E0,
            levels[K].energy,
            levels[K_below].energy if K_below is not None else None,
            K_below,
        )
        self.logger.log("CRITERION", f"verdict={report.verdict}", {"E0": E0, "K": K, "K_below": K_below})
        return {
            "status": "ok",
            "levels": {str(k): r.to_dict() for k, r in levels.items()},
            "criterion": {
                "E0": E0,
                "K": K,
                "verdict": report.verdict,
                "level_K": report.level_K,
                "level_below": report.level_below,
                "K_below": report.K_below,
                "warning": report.warning,
            },
        }

    @staticmethod
    def _level_options(config) -> dict:
        if config.levels is None:
            return {}
        lv = config.levels
        return {"iterations": lv.iterations, "step": lv.step, "tol": lv.tol}

    def _write_common(self, config, command, result, wall):
        out = self.output_dir(config)
        artifacts.write_manifest(out / "manifest.json", config, {"command": command}, wall_time=wall)
        artifacts.write_result_json(out / "result.json", result)
        self.logger.log("ARTIFACT", str(out / "manifest.json"))
        self.logger.write(out / "trace.txt")
        result["output"] = str(out)
