"""Scenario files: JSON documents parsed into frozen dataclasses.

`from_dict` only checks structure and types; physical admissibility is left
to the gate (gate_api.admissibility), which reads `ScenarioConfig.problems()`.
"""

import dataclasses
import json
import pathlib
from dataclasses import dataclass
from typing import Optional, Tuple

from sim.configs import is_admissible
from sim.errors import ScenarioError
from sim.grid import BOUNDARIES, WAVEFORMS, Waveform
from sim.propagation import GAUGE_MODES, SCHEMES

FORMAT_VERSION = 1

EXTERNAL_KINDS = ("zero", "harmonic", "soft-coulomb-well", "tabulated")
PAIR_KINDS = ("zero", "constant", "soft-coulomb", "tabulated")
INITIAL_KINDS = ("random", "ground-state", "file")


@dataclass(frozen=True)
class GridSpec:
    L: int
    h: float
    boundary: str = "dirichlet"


@dataclass(frozen=True)
class ExternalPotentialSpec:
    kind: str = "zero"
    omega: float = 1.0
    charge: float = 1.0
    softening: float = 1.0
    center: float = 0.0
    samples: Optional[Tuple[float, ...]] = None


@dataclass(frozen=True)
class PairPotentialSpec:
    kind: str = "soft-coulomb"
    strength: float = 1.0
    softening: float = 1.0
    samples: Optional[Tuple[float, ...]] = None


@dataclass(frozen=True)
class LaserSpec:
    omega: Waveform = Waveform(kind="constant", value=1.0)
    vector_potential: Waveform = Waveform(kind="constant", value=0.0)


@dataclass(frozen=True)
class InitialStateSpec:
    kind: str = "random"
    seed: int = 0
    path: Optional[str] = None
    mix: float = 0.0


@dataclass(frozen=True)
class IntegratorSpec:
    scheme: str = "rk4"
    dt: float = 1e-3
    T: float = 1.0
    diag_every: int = 10
    reorthonormalize: bool = False


@dataclass(frozen=True)
class GaugeConfig:
    mode: str = "onebody"
    matrix: Optional[Tuple[Tuple[float, ...], ...]] = None


@dataclass(frozen=True)
class RegularizationSpec:
    epsilon: float
    mode: str = "shift"


@dataclass(frozen=True)
class DiagnosticsSpec:
    residual: bool = False
    singular_tol: float = 1e-10
    gap_tol: float = 1e-6
    oracle_cap: int = 5000


@dataclass(frozen=True)
class LevelsSpec:
    k_list: Tuple[int, ...] = ()
    iterations: int = 500
    step: float = 0.5
    tol: float = 1e-7


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    particles: int
    orbitals: int
    grid: GridSpec
    external_potential: ExternalPotentialSpec = ExternalPotentialSpec()
    pair_potential: PairPotentialSpec = PairPotentialSpec()
    laser: Optional[LaserSpec] = None
    half_kinetic: bool = True
    initial_state: InitialStateSpec = InitialStateSpec()
    integrator: IntegratorSpec = IntegratorSpec()
    gauge: GaugeConfig = GaugeConfig()
    regularization: Optional[RegularizationSpec] = None
    diagnostics: DiagnosticsSpec = DiagnosticsSpec()
    output: str = "out"
    levels: Optional[LevelsSpec] = None
    format_version: int = FORMAT_VERSION

    # ------------------------------------------------------------------

    def problems(self) -> list:
        """Invariant violations; empty when the scenario may run."""
        out = []
        N, K, L = self.particles, self.orbitals, self.grid.L
        if not is_admissible(N, K):
            out.append(f"(N={N}, K={K}) is not an admissible rank pair")
        if K > L:
            out.append(f"K={K} orbitals exceed L={L} grid points")
        if not self.integrator.dt > 0:
            out.append(f"dt must be positive, got {self.integrator.dt}")
        if self.integrator.T < 0:
            out.append(f"T must be non-negative, got {self.integrator.T}")
        if self.integrator.scheme == "strang-split" and self.gauge.mode != "onebody":
            out.append("strang-split integrates the working equations only (gauge 'onebody')")
        if self.gauge.mode == "custom":
            M = self.gauge.matrix
            if M is None or len(M) != K or any(len(row) != K for row in M):
                out.append(f"custom gauge needs a {K}x{K} matrix")
            elif any(M[i][j] != M[j][i] for i in range(K) for j in range(K)):
                out.append("custom gauge matrix must be symmetric")
        if self.regularization is not None and not self.regularization.epsilon > 0:
            out.append(f"regularization epsilon must be positive, got {self.regularization.epsilon}")
        if self.initial_state.kind == "file" and not self.initial_state.path:
            out.append("initial_state kind 'file' needs a path")
        if not 0.0 <= self.initial_state.mix <= 1.0:
            out.append(f"initial_state mix must lie in [0, 1], got {self.initial_state.mix}")
        for label, pot in (("external potential", self.external_potential), ("pair potential", self.pair_potential)):
            if pot.kind == "tabulated" and (pot.samples is None or len(pot.samples) != L):
                out.append(f"tabulated {label} needs exactly L={L} samples")
        if self.diagnostics.residual and self.laser is not None:
            out.append("the residual bound is only available for a static Hamiltonian (no laser)")
        if self.levels is not None:
            bad = [k for k in self.levels.k_list if not is_admissible(N, k) or k > L]
            if bad:
                out.append(f"levels k_list has inadmissible or oversized entries: {bad}")
        return out

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        try:
            return _parse(data)
        except ScenarioError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"invalid scenario: {exc}") from exc

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


def _tuple(values):
    return None if values is None else tuple(float(x) for x in values)


def _choice(value: str, allowed, what: str) -> str:
    if value not in allowed:
        raise ScenarioError(f"unknown {what} {value!r}; expected one of {allowed}")
    return value


def _waveform(data: Optional[dict], default: Waveform) -> Waveform:
    if data is None:
        return default
    _choice(data.get("kind", "constant"), WAVEFORMS, "waveform")
    return Waveform(**data)


def _parse(data: dict) -> ScenarioConfig:
    version = data.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise ScenarioError(f"unsupported format_version {version}; this build reads {FORMAT_VERSION}")

    g = data["grid"]
    grid = GridSpec(L=int(g["L"]), h=float(g["h"]), boundary=_choice(g.get("boundary", "dirichlet"), BOUNDARIES, "boundary"))

    ext = dict(data.get("external_potential") or {"kind": "zero"})
    _choice(ext.get("kind", "zero"), EXTERNAL_KINDS, "external potential")
    ext["samples"] = _tuple(ext.get("samples"))
    external = ExternalPotentialSpec(**ext)

    pair = dict(data.get("pair_potential") or {"kind": "zero"})
    _choice(pair.get("kind", "soft-coulomb"), PAIR_KINDS, "pair potential")
    pair["samples"] = _tuple(pair.get("samples"))
    pair_spec = PairPotentialSpec(**pair)

    laser = None
    if data.get("laser") is not None:
        las = data["laser"]
        laser = LaserSpec(
            omega=_waveform(las.get("omega"), LaserSpec.omega),
            vector_potential=_waveform(las.get("vector_potential"), LaserSpec.vector_potential),
        )

    init = dict(data.get("initial_state") or {})
    _choice(init.get("kind", "random"), INITIAL_KINDS, "initial state")
    initial = InitialStateSpec(**init)

    integ = dict(data.get("integrator") or {})
    _choice(integ.get("scheme", "rk4"), SCHEMES, "scheme")
    integrator = IntegratorSpec(**integ)

    gauge_data = dict(data.get("gauge") or {})
    _choice(gauge_data.get("mode", "onebody"), GAUGE_MODES, "gauge")
    if gauge_data.get("matrix") is not None:
        gauge_data["matrix"] = tuple(tuple(float(x) for x in row) for row in gauge_data["matrix"])
    gauge = GaugeConfig(**gauge_data)

    regularization = None
    if data.get("regularization") is not None:
        reg = data["regularization"]
        regularization = RegularizationSpec(
            epsilon=float(reg["epsilon"]), mode=_choice(reg.get("mode", "shift"), ("shift", "exponential"), "regularization mode")
        )

    levels = None
    if data.get("levels") is not None:
        lv = dict(data["levels"])
        lv["k_list"] = tuple(int(k) for k in lv.get("k_list", ()))
        levels = LevelsSpec(**lv)

    return ScenarioConfig(
        name=str(data.get("name", "scenario")),
        particles=int(data["particles"]),
        orbitals=int(data["orbitals"]),
        grid=grid,
        external_potential=external,
        pair_potential=pair_spec,
        laser=laser,
        half_kinetic=bool(data.get("half_kinetic", True)),
        initial_state=initial,
        integrator=integrator,
        gauge=gauge,
        regularization=regularization,
        diagnostics=DiagnosticsSpec(**(data.get("diagnostics") or {})),
        output=str(data.get("output", "out")),
        levels=levels,
        format_version=FORMAT_VERSION,
    )


def load_scenario(path) -> ScenarioConfig:
    path = pathlib.Path(path)
    try:
        with open(path) as f:
            data = json.load(f)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario {path} is not valid JSON: {exc}") from exc
    return ScenarioConfig.from_dict(data)
