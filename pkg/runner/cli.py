"""mctdhf-lab command line.

    mctdhf-lab run cases/free_particles.json
    mctdhf-lab minimize cases/ground_levels.json --seed 3
    mctdhf-lab levels cases/ground_levels.json --k-list 2 4 6
    mctdhf-lab verify all

Exit codes: 0 ok, 2 singular-density halt, 1 blocked or failed.
"""

import argparse
import dataclasses
import json
import os
import sys

THREAD_ENV = "MCTDHF_THREADS"
THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")

EXIT_CODES = {"ok": 0, "halted": 2, "blocked": 1, "error": 1}


def _limit_threads(environ=os.environ) -> None:
    # must run before numpy is first imported
    threads = environ.get(THREAD_ENV)
    if threads:
        for name in THREAD_VARS:
            environ[name] = threads


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mctdhf-lab", description="MCTDHF propagation, ground levels and acceptance suites.")
    p.add_argument("--seed", type=int, default=None, help="override initial_state.seed")
    p.add_argument("--output-root", default=None, help="prefix for the scenario's output directory")
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in (("run", "propagate a scenario"), ("minimize", "minimize the energy at the scenario's K")):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("config")
    lv = sub.add_parser("levels", help="ground levels I(K) and the existence criterion")
    lv.add_argument("config")
    lv.add_argument("--k-list", type=int, nargs="+", default=None)
    vf = sub.add_parser("verify", help="run an acceptance suite")
    vf.add_argument("suite")
    return p


def _verify(suite: str, seed: int) -> int:
    from runner.verify import format_report, run_suite, suite_names

    if suite not in suite_names():
        print(f"[ERROR] unknown suite {suite!r}; expected one of {suite_names()}", file=sys.stderr)
        return 1
    results = run_suite(suite, seed=seed)
    print(format_report(results))
    return 0 if all(r.passed for r in results) else 1


def _scenario(args) -> int:
    from gate_api import ScenarioGate
    from sim.errors import ScenarioError
    from sim.executor import Executor
    from sim.scenario import load_scenario

    try:
        config = load_scenario(args.config)
    except ScenarioError as exc:
        print(f"[ERROR] {exc}", file=sys.stderr)
        return 1
    if args.seed is not None:
        config = config.replace(initial_state=dataclasses.replace(config.initial_state, seed=args.seed))

    executor = Executor(gate=ScenarioGate(), output_root=args.output_root)
    result = executor.execute(config, command=args.command, k_list=getattr(args, "k_list", None))
    status = result["status"]
    if status == "blocked":
        for reason in result.get("reasons", []):
            print(f"[DENY] {reason}", file=sys.stderr)
    elif status == "error":
        print(f"[ERROR] {result['reason']}", file=sys.stderr)
    elif status == "halted":
        halt = result["halt"]
        print(f"[HALT] singular density at t={halt['t']:.6g}: mu={halt['mu']:.3e}, blow-up integral {halt['blowup_integral']:.6g}")
    print(json.dumps({k: v for k, v in result.items() if k in ("status", "output", "steps", "t_final")}, sort_keys=True))
    return EXIT_CODES[status]


def main(argv=None) -> int:
    _limit_threads()
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        return _verify(args.suite, 0 if args.seed is None else args.seed)
    return _scenario(args)


if __name__ == "__main__":
    sys.exit(main())
