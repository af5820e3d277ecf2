"""Exception hierarchy for the MCTDHF engine.

Each error also subclasses the closest builtin so callers can catch either.
"""


class MCTDHFError(Exception):
    """Base class for every engine error."""


class InvalidDimensionError(MCTDHFError, ValueError):
    """Particle/orbital/grid counts or array shapes are inconsistent."""


class ConfigurationIndexError(MCTDHFError, KeyError):
    """An orbital index was expected inside a configuration but is not."""


class InadmissibleError(MCTDHFError, ValueError):
    """(N, K) is not an admissible rank pair."""


class NonUnitaryError(MCTDHFError, ValueError):
    """A matrix required to be unitary is not, within tolerance."""


class NonHermitianError(MCTDHFError, ValueError):
    """A matrix required to be Hermitian is not, within tolerance."""


class RankDeficiencyError(MCTDHFError, ValueError):
    """A Gram matrix is singular within tolerance."""


class OccupationRangeError(MCTDHFError, ValueError):
    """An occupation number lies outside [-tol, 1 + tol]."""


class UnsupportedOrderError(MCTDHFError, ValueError):
    """Reduced densities are only available for n in {1, 2}."""


class ScenarioError(MCTDHFError, ValueError):
    """A scenario file failed to parse or validate."""


class SingularDensityError(MCTDHFError, RuntimeError):
    """The density matrix is singular and no regularization was supplied."""

    def __init__(self, mu: float, message: str = None):
        self.mu = float(mu)
        super().__init__(message or f"density matrix singular: mu={self.mu:.3e}")


class DegenerateSpectrumError(MCTDHFError, RuntimeError):
    """Occupation numbers are not pairwise distinct enough for the natural gauge."""

    def __init__(self, gap: float, message: str = None):
        self.gap = float(gap)
        super().__init__(message or f"occupation gap {self.gap:.3e} below threshold")


class IntegratorDivergedError(MCTDHFError, RuntimeError):
    """A non-finite value appeared in the propagated state."""

    def __init__(self, last_snapshot, message: str = None):
        self.last_snapshot = last_snapshot
        t = getattr(last_snapshot, "t", float("nan"))
        super().__init__(message or f"integrator diverged after t={t:.6g}")


class OracleSizeError(MCTDHFError, RuntimeError):
    """The full-CI dimension exceeds the configured cap."""

    def __init__(self, dimension: int, cap: int):
        self.dimension = int(dimension)
        self.cap = int(cap)
        super().__init__(f"full-CI dimension {self.dimension} exceeds cap {self.cap}")


class IntegratorConfigError(MCTDHFError, ValueError):
    """Unknown scheme, non-positive step, or a scheme/gauge combination that is not supported."""


class OffDiagonalDensityError(MCTDHFError, ValueError):
    """Gamma is not diagonal in the current orbitals, so diag(Gamma) are not occupations."""

    def __init__(self, deviation: float, message: str = None):
        self.deviation = float(deviation)
        super().__init__(message or f"density matrix off-diagonal part {self.deviation:.3e} exceeds tolerance")
