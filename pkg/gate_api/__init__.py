"""Gate API package. Interface contract and the scenario admissibility gate."""

from gate_api.admissibility import ScenarioGate
from gate_api.interface import Gate

__all__ = ["Gate", "ScenarioGate"]
