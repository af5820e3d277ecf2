"""Deterministic trace logger. No timestamps. Ordered event numbering.

Event data is flattened to plain Python on entry and floats are rendered
with 12 significant digits, so two runs of the same scenario produce the
same trace text on any platform.
"""

import collections
import numbers
from pathlib import Path

FLOAT_DIGITS = 12

EVENT_TYPES = (
    "GATE", "EXEC_START", "EXEC_END", "EXEC_ERROR",
    "RUN_START", "DIAG", "HALT", "RUN_END",
    "BACKTRACK", "DESCENT", "STALLED", "CONVERGED",
    "LEVEL", "CRITERION", "ARTIFACT",
)


def _plain(value):
    # numpy scalars render differently across versions
    if isinstance(value, bool):
        return value
    if isinstance(value, numbers.Integral):
        return int(value)
    if isinstance(value, numbers.Real):
        return float(value)
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def _render(value) -> str:
    if isinstance(value, float):
        return format(value, f".{FLOAT_DIGITS}g")
    if isinstance(value, dict):
        return "{" + ", ".join(f"{k!r}: {_render(v)}" for k, v in value.items()) + "}"
    if isinstance(value, list):
        return "[" + ", ".join(_render(v) for v in value) + "]"
    return repr(value)


class TraceLogger:
    """Records propagation, minimization and gate events in order.

    Entries are dicts with ``seq``, ``event``, ``detail`` and, when given,
    ``data``. Event types in use are listed in ``EVENT_TYPES``.
    """

    def __init__(self):
        self._entries = []

    def __len__(self) -> int:
        return len(self._entries)

    def log(self, event_type: str, detail: str, data: dict = None):
        entry = {"seq": len(self._entries) + 1, "event": event_type, "detail": detail}
        if data is not None:
            entry["data"] = _plain(data)
        self._entries.append(entry)

    def get_trace(self) -> list:
        return list(self._entries)

    def events(self, event_type: str) -> list:
        return [e for e in self._entries if e["event"] == event_type]

    def counts(self) -> dict:
        return dict(collections.Counter(e["event"] for e in self._entries))

    def format_trace(self) -> str:
        return "\n".join(self._format(e) for e in self._entries)

    @staticmethod
    def _format(entry: dict) -> str:
        line = f"[{entry['seq']:04d}] {entry['event']}: {entry['detail']}"
        if "data" in entry:
            line += f" | {_render(entry['data'])}"
        return line

    def write(self, path) -> Path:
        path = Path(path)
        path.write_text(self.format_trace() + "\n")
        return path

    def reset(self):
        self._entries = []
