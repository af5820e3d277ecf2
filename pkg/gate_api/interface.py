"""Gate contract: a verdict on a parsed scenario before any numerical work."""

ALLOW, HOLD, DENY = "ALLOW", "HOLD", "DENY"


class Gate:
    """Admissibility gate consulted by the executor.

    Subclasses implement evaluate(scenario, context_snapshot) and may fill
    `last_reasons` with the human-readable causes of their latest verdict.
    HOLD and DENY both block the run; HOLD marks a scenario that could run
    after a change of context (another command or level list).
    """

    VALID_VERDICTS = (ALLOW, HOLD, DENY)
    last_reasons = ()

    def evaluate(self, scenario, context_snapshot: dict) -> str:
        """Return ALLOW, HOLD or DENY for `scenario`.

        `context_snapshot` describes the requested run: command, k_list and
        output directory. Implementations must not mutate either argument.
        """
        raise NotImplementedError(f"{type(self).__name__}.evaluate() is not implemented")

    def decide(self, scenario, context_snapshot: dict) -> tuple:
        """Evaluate and return (verdict, reasons); unknown verdicts raise ValueError."""
        verdict = self.evaluate(scenario, context_snapshot)
        if verdict not in self.VALID_VERDICTS:
            raise ValueError(f"{type(self).__name__} returned {verdict!r}, expected one of {self.VALID_VERDICTS}")
        return verdict, list(self.last_reasons)
