"""The scenario gate: admissibility and size checks ahead of any run."""

from scipy.special import comb

from gate_api.interface import Gate
from sim.configs import is_admissible


class ScenarioGate(Gate):
    """DENY on any invariant violation of the scenario; ALLOW otherwise.

    The full-CI reference is C(L, N)-dimensional; a run that asks for the
    residual bound is denied when that dimension exceeds the configured cap.
    `last_reasons` keeps the reasons behind the most recent verdict.
    """

    def __init__(self):
        self.last_reasons = []

    def evaluate(self, scenario, context_snapshot: dict) -> str:
        reasons = list(scenario.problems())
        command = context_snapshot.get("command", "run")
        if command == "run" and scenario.diagnostics.residual:
            dim = int(comb(scenario.grid.L, scenario.particles, exact=True))
            if dim > scenario.diagnostics.oracle_cap:
                reasons.append(
                    f"residual bound needs a full-CI space of dimension {dim}, cap is {scenario.diagnostics.oracle_cap}"
                )
        if command == "levels":
            k_list = context_snapshot.get("k_list") or ()
            bad = [k for k in k_list if not is_admissible(scenario.particles, k) or k > scenario.grid.L]
            if bad:
                reasons.append(f"levels k_list has inadmissible or oversized entries: {bad}")
            if not k_list:
                reasons.append("levels needs a non-empty k_list")
        self.last_reasons = reasons
        return "DENY" if reasons else "ALLOW"
