#!/usr/bin/env python3
"""Quick demo: run every scenario in cases/ through the gated executor.

Usage:
    python run_demo.py [output_root]

Scenarios with a `levels` section run the ground-level command, all others
are propagated. Artifacts land under output_root (default: demo_out/).
"""

import pathlib
import sys

from gate_api import ScenarioGate
from sim.executor import Executor
from sim.logger import TraceLogger
from sim.scenario import load_scenario


CASES_DIR = pathlib.Path(__file__).resolve().parent / "cases"

DIVIDER = "-" * 60


def run_one(path: pathlib.Path, output_root: pathlib.Path) -> dict:
    """Execute a single scenario with a fresh executor and print a summary."""
    config = load_scenario(path)
    command = "levels" if config.levels is not None else "run"
    logger = TraceLogger()
    executor = Executor(logger=logger, gate=ScenarioGate(), output_root=output_root)

    print(f"\n{DIVIDER}")
    print(f"CASE: {path.stem}")
    print(f"  command   : {command}")
    print(f"  N, K, L   : {config.particles}, {config.orbitals}, {config.grid.L}")
    print(DIVIDER)

    result = executor.execute(config, command=command)

    print(f"  status    : {result['status']}")
    if result["status"] == "blocked":
        for reason in result["reasons"]:
            print(f"  denied    : {reason}")
    elif result["status"] == "error":
        print(f"  reason    : {result['reason']}")
    elif command == "run":
        summary = result["summary"]
        print(f"  energy drift     : {summary['energy_drift']:.3e}")
        print(f"  constraint drift : {summary['constraint_drift']:.3e}")
        print(f"  min mu           : {summary['min_mu']:.3e}")
        if "halt" in result:
            print(f"  halted at t={result['halt']['t']:.4g}, blow-up integral {result['halt']['blowup_integral']:.4g}")
    else:
        for K, level in sorted(result["levels"].items(), key=lambda kv: int(kv[0])):
            print(f"  I({K}) = {level['energy']:.10f}  converged={level['converged']}")
        print(f"  criterion : {result['criterion']['verdict']}")
    print(f"  trace     : {len(logger)} events {logger.counts()}")
    return result


def main():
    print("=" * 60)
    print("MCTDHF LAB: Scenario Demo")
    print("=" * 60)

    output_root = pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else pathlib.Path("demo_out")
    cases = sorted(CASES_DIR.glob("*.json"))
    if not cases:
        print("ERROR: No scenario files found.", file=sys.stderr)
        sys.exit(1)

    statuses = {}
    for path in cases:
        statuses[path.stem] = run_one(path, output_root)["status"]

    print(f"\n{'=' * 60}")
    for name, status in statuses.items():
        print(f"  {name:<24} {status}")
    print(f"{'=' * 60}")


if __name__ == "__main__":
    main()
