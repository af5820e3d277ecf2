"""Shared fixtures for the MCTDHF tests."""

import json
import pathlib

import numpy as np
import pytest

from sim.configs import enumerate_configs
from sim.executor import Executor
from sim.grid import build_grid, build_onebody, harmonic, one_body_eigenstates, random_orbitals, soft_coulomb, zero_pair
from sim.logger import TraceLogger
from sim.propagation import MCProblem, MCState
from sim.scenario import ScenarioConfig


CASES_DIR = pathlib.Path(__file__).resolve().parent.parent / "cases"


def _load_case(name: str) -> ScenarioConfig:
    with open(CASES_DIR / name) as f:
        return ScenarioConfig.from_dict(json.load(f))


def make_problem(N: int, K: int, L: int, h: float = 0.6, interacting: bool = True) -> MCProblem:
    grid = build_grid(L, h)
    H = build_onebody(grid, harmonic(1.0))
    v = soft_coulomb(grid) if interacting else zero_pair(grid)
    return MCProblem(grid=grid, H=H, v=v, table=enumerate_configs(N, K))


def random_state(problem: MCProblem, rng: np.random.Generator) -> MCState:
    r = problem.table.r
    C = rng.standard_normal(r) + 1j * rng.standard_normal(r)
    return MCState(C=C / np.linalg.norm(C), Phi=random_orbitals(problem.grid, problem.table.K, rng))


def mixed_state(problem: MCProblem, mix: float = 0.3) -> MCState:
    """Lowest eigenorbitals with C = sqrt(1 - mix) e_first + sqrt(mix) e_last."""
    C = np.zeros(problem.table.r, dtype=complex)
    C[0], C[-1] = np.sqrt(1.0 - mix), np.sqrt(mix)
    return MCState(C=C, Phi=one_body_eigenstates(problem.H, problem.table.K)[1].astype(complex))


def random_unitary(K: int, rng: np.random.Generator) -> np.ndarray:
    Z = rng.standard_normal((K, K)) + 1j * rng.standard_normal((K, K))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def logger():
    return TraceLogger()


@pytest.fixture
def oracle_problem():
    """(N=2, K=3, L=6): small enough for dense full-CI checks."""
    return make_problem(2, 3, 6)


@pytest.fixture
def pair_problem():
    """(N=2, K=4, L=8): the smallest full-rank interacting dynamics."""
    return make_problem(2, 4, 8)


@pytest.fixture
def executor(tmp_path, logger):
    return Executor(logger=logger, output_root=tmp_path)


@pytest.fixture
def free_particles():
    return _load_case("free_particles.json")


@pytest.fixture
def soft_coulomb_pair():
    return _load_case("soft_coulomb_pair.json")


@pytest.fixture
def inadmissible_n2k3():
    return _load_case("inadmissible_n2k3.json")


@pytest.fixture
def degenerate_gamma():
    return _load_case("degenerate_gamma.json")


@pytest.fixture
def regularized_gamma():
    return _load_case("regularized_gamma.json")


@pytest.fixture
def ground_levels_case():
    return _load_case("ground_levels.json")
