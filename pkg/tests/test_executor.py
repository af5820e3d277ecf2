"""Executor runs scenarios end to end and writes their artifacts."""

import json

import numpy as np
import pytest

from gate_api import ScenarioGate
from sim import artifacts
from sim.errors import ScenarioError
from sim.executor import Executor, build_initial_state, build_problem, gauge_spec
from sim.logger import EVENT_TYPES
from sim.propagation import MCState
from sim.scenario import InitialStateSpec, PairPotentialSpec
from sim.stationary import VERDICTS
from tests.conftest import _load_case


# ---------------------------------------------------------------------------
# Building problems from scenarios
# ---------------------------------------------------------------------------

class TestBuildProblem:

    def test_free_particles_problem(self, free_particles):
        problem = build_problem(free_particles)
        assert problem.grid.L == 16
        assert problem.v.is_zero
        assert (problem.table.N, problem.table.K) == (2, 4)

    def test_rank_override(self, ground_levels_case):
        assert build_problem(ground_levels_case, K=6).table.K == 6

    def test_tabulated_pair(self, free_particles):
        cfg = free_particles.replace(pair_potential=PairPotentialSpec(kind="tabulated", samples=tuple([1.0] * 16)))
        assert not build_problem(cfg).v.is_zero

    def test_laser_makes_operator_time_dependent(self):
        assert not build_problem(_load_case("laser_pulse.json")).H.is_static

    def test_ground_state_mix(self, soft_coulomb_pair):
        problem = build_problem(soft_coulomb_pair)
        state = build_initial_state(soft_coulomb_pair, problem)
        assert np.isclose(np.linalg.norm(state.C), 1.0)
        assert np.isclose(abs(state.C[-1]) ** 2, 0.3)

    def test_random_state_is_seeded(self, free_particles):
        problem = build_problem(free_particles)
        a = build_initial_state(free_particles, problem)
        b = build_initial_state(free_particles, problem)
        assert np.array_equal(a.C, b.C)
        assert np.array_equal(a.Phi, b.Phi)

    def test_gauge_spec(self, free_particles):
        assert gauge_spec(free_particles).mode == "onebody"


# ---------------------------------------------------------------------------
# Snapshots
# ---------------------------------------------------------------------------

class TestSnapshots:

    def test_round_trip(self, tmp_path, rng):
        state = MCState(C=rng.standard_normal(6) + 1j * rng.standard_normal(6), Phi=rng.standard_normal((8, 4)) + 0j, t=0.25)
        artifacts.write_snapshot(tmp_path / "snap", state)
        loaded = artifacts.load_snapshot(tmp_path / "snap.json")
        assert np.array_equal(loaded.C, state.C)
        assert np.array_equal(loaded.Phi, state.Phi)
        assert loaded.t == 0.25

    def test_missing_snapshot_raises(self, tmp_path):
        with pytest.raises(ScenarioError):
            artifacts.load_snapshot(tmp_path / "nothing")

    def test_truncated_payload_raises(self, tmp_path):
        artifacts.write_snapshot(tmp_path / "snap", MCState(C=np.ones(6, dtype=complex), Phi=np.ones((8, 4), dtype=complex)))
        data = (tmp_path / "snap.bin").read_bytes()
        (tmp_path / "snap.bin").write_bytes(data[:-16])
        with pytest.raises(ScenarioError):
            artifacts.load_snapshot(tmp_path / "snap")

    def test_file_initial_state(self, free_particles, tmp_path):
        problem = build_problem(free_particles)
        state = build_initial_state(free_particles, problem)
        artifacts.write_snapshot(tmp_path / "start", state)
        cfg = free_particles.replace(initial_state=InitialStateSpec(kind="file", path=str(tmp_path / "start")))
        loaded = build_initial_state(cfg, problem)
        assert np.array_equal(loaded.C, state.C)

    def test_file_initial_state_shape_checked(self, executor, free_particles, tmp_path):
        artifacts.write_snapshot(tmp_path / "small", MCState(C=np.ones(1, dtype=complex), Phi=np.ones((16, 2), dtype=complex)))
        cfg = free_particles.replace(initial_state=InitialStateSpec(kind="file", path=str(tmp_path / "small")))
        result = executor.execute(cfg)
        assert result["status"] == "error"
        assert "snapshot" in result["reason"]


# ---------------------------------------------------------------------------
# Runs
# ---------------------------------------------------------------------------

class TestRun:

    def test_free_particles(self, executor, free_particles, tmp_path):
        result = executor.execute(free_particles)
        assert result["status"] == "ok"
        assert result["steps"] == 100
        out = tmp_path / free_particles.output
        rows = artifacts.read_diagnostics_csv(out / "diagnostics.csv")
        E = np.array([r["energy"] for r in rows])
        assert len(rows) == 11
        assert np.max(np.abs(E - E[0])) < 1e-10
        assert len(list((out / "snapshots").glob("*.json"))) == 11
        for name in ("manifest.json", "result.json", "trace.txt"):
            assert (out / name).exists()

    def test_manifest_records_config(self, executor, free_particles, tmp_path):
        executor.execute(free_particles)
        manifest = json.loads((tmp_path / free_particles.output / "manifest.json").read_text())
        assert manifest["code_version"] == artifacts.CODE_VERSION
        assert manifest["command"] == "run"
        assert manifest["config"]["integrator"]["scheme"] == "strang-split"

    def test_degenerate_density_halts(self, executor, degenerate_gamma, tmp_path):
        result = executor.execute(degenerate_gamma)
        assert result["status"] == "halted"
        assert result["halt"]["step"] == 0
        assert result["halt"]["blowup_integral"] == 0.0
        written = json.loads((tmp_path / degenerate_gamma.output / "result.json").read_text())
        assert written["status"] == "halted"

    def test_regularized_density_completes(self, executor, regularized_gamma):
        result = executor.execute(regularized_gamma)
        assert result["status"] == "ok"
        assert np.isclose(result["t_final"], 0.2)

    def test_full_rank_residual_vanishes(self, executor, tmp_path):
        cfg = _load_case("exact_full_rank.json")
        assert executor.execute(cfg)["status"] == "ok"
        rows = artifacts.read_diagnostics_csv(tmp_path / cfg.output / "diagnostics.csv")
        assert max(r["residual"] for r in rows) < 1e-8

    def test_gated_inadmissible_blocked(self, logger, inadmissible_n2k3, tmp_path):
        result = Executor(logger=logger, gate=ScenarioGate(), output_root=tmp_path).execute(inadmissible_n2k3)
        assert result["status"] == "blocked"
        assert not (tmp_path / inadmissible_n2k3.output).exists()

    def test_unknown_command(self, executor, free_particles, tmp_path):
        result = executor.execute(free_particles, command="explode")
        assert result["status"] == "error"
        assert not (tmp_path / free_particles.output).exists()

    def test_trace_is_ordered(self, executor, logger, free_particles):
        executor.execute(free_particles)
        events = [e["event"] for e in logger.get_trace()]
        assert events[0] == "EXEC_START"
        assert events[-1] == "EXEC_END"
        assert [e["seq"] for e in logger.get_trace()] == list(range(1, len(events) + 1))


# ---------------------------------------------------------------------------
# Minimization and levels
# ---------------------------------------------------------------------------

class TestStationaryCommands:

    def test_minimize_writes_ground_state(self, executor, ground_levels_case, tmp_path):
        result = executor.execute(ground_levels_case, command="minimize")
        assert result["status"] == "ok"
        assert result["minimum"]["K"] == 4
        assert (tmp_path / ground_levels_case.output / "ground_state.json").exists()

    def test_levels_and_criterion(self, executor, logger, ground_levels_case):
        result = executor.execute(ground_levels_case, command="levels")
        assert result["status"] == "ok"
        assert set(result["levels"]) == {"2", "4", "6"}
        I = [result["levels"][k]["energy"] for k in ("2", "4", "6")]
        assert I[1] <= I[0] + 1e-10
        assert I[2] <= I[1] + 1e-10
        assert result["criterion"]["K_below"] == 2
        assert result["criterion"]["verdict"] in VERDICTS
        assert len(logger.events("CRITERION")) == 1

    def test_emitted_events_are_documented(self, executor, logger, free_particles, degenerate_gamma, ground_levels_case):
        executor.execute(free_particles)
        executor.execute(degenerate_gamma)
        executor.execute(ground_levels_case, command="levels")
        assert set(logger.counts()) <= set(EVENT_TYPES)
        assert {"HALT", "LEVEL", "CRITERION", "ARTIFACT"} <= set(logger.counts())
