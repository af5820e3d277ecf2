"""On-disk artifacts: diagnostics CSV, JSON manifests/results, binary snapshots.

A snapshot is a pair `<stem>.json` (header) + `<stem>.bin` (little-endian
complex128 payload: C followed by Phi in row-major order).
"""

import csv
import json
import math
import pathlib

import numpy as np

from sim.errors import ScenarioError
from sim.propagation import DIAGNOSTIC_COLUMNS, Diagnostics, MCState

CODE_VERSION = "0.2.0"
SNAPSHOT_DTYPE = "<c16"


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {k: _json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    if isinstance(value, np.generic):
        return _json_value(value.item())
    return value


def write_json(path, payload: dict) -> pathlib.Path:
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(_json_value(payload), f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def write_diagnostics_csv(path, diagnostics: Diagnostics) -> pathlib.Path:
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(DIAGNOSTIC_COLUMNS)
        for row in diagnostics.rows:
            w.writerow([repr(float(row[c])) for c in DIAGNOSTIC_COLUMNS])
    return path


def read_diagnostics_csv(path) -> list:
    with open(path, newline="") as f:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(f)]


def write_manifest(path, config, extra: dict = None, wall_time: float = None) -> pathlib.Path:
    payload = {
        "code_version": CODE_VERSION,
        "config": config.to_dict(),
        "wall_time_seconds": wall_time,
    }
    if extra:
        payload.update(extra)
    return write_json(path, payload)


def write_result_json(path, result: dict) -> pathlib.Path:
    return write_json(path, result)


def write_snapshot(stem, state: MCState) -> pathlib.Path:
    stem = pathlib.Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    C = np.ascontiguousarray(state.C, dtype=SNAPSHOT_DTYPE)
    Phi = np.ascontiguousarray(state.Phi, dtype=SNAPSHOT_DTYPE)
    header = {
        "t": float(state.t),
        "dtype": SNAPSHOT_DTYPE,
        "C_shape": list(C.shape),
        "Phi_shape": list(Phi.shape),
        "order": "C",
    }
    with open(stem.with_suffix(".bin"), "wb") as f:
        f.write(C.tobytes())
        f.write(Phi.tobytes())
    write_json(stem.with_suffix(".json"), header)
    return stem.with_suffix(".json")


def load_snapshot(stem) -> MCState:
    stem = pathlib.Path(stem)
    if stem.suffix in (".json", ".bin"):
        stem = stem.with_suffix("")
    try:
        with open(stem.with_suffix(".json")) as f:
            header = json.load(f)
        raw = np.fromfile(stem.with_suffix(".bin"), dtype=header["dtype"])
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot read snapshot {stem}: {exc}") from exc
    nC = int(np.prod(header["C_shape"]))
    nPhi = int(np.prod(header["Phi_shape"]))
    if raw.size != nC + nPhi:
        raise ScenarioError(f"snapshot {stem} payload has {raw.size} values, header expects {nC + nPhi}")
    return MCState(
        C=raw[:nC].reshape(header["C_shape"]).astype(complex),
        Phi=raw[nC:].reshape(header["Phi_shape"]).astype(complex),
        t=float(header["t"]),
    )
