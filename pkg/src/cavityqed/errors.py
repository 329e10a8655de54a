"""Exception hierarchy shared by all modules.

Each family maps to one CLI exit status, see :mod:`cavityqed.cli`.
"""
from __future__ import annotations


class CavityQEDError(Exception):
    """Base class for all package errors."""


class DimensionError(CavityQEDError, ValueError):
    """Operator or state shapes do not match their Hilbert space."""


class ConvergenceError(CavityQEDError):
    """A truncation (Fock, grid, matter basis) is too small for the request."""


class SolverError(CavityQEDError):
    """A linear-algebra step failed its post-condition."""


class NotHermitianError(SolverError, ValueError):
    def __init__(self, defect: float):
        super().__init__(f"operator is not Hermitian: max |H - H^dag| = {defect:.3e}")
        self.defect = defect


class DegenerateSteadyStateError(SolverError):
    def __init__(self, nullity: int):
        super().__init__(f"Liouvillian null space has dimension {nullity}, expected 1")
        self.nullity = nullity


class ForbiddenTransitionError(CavityQEDError, ValueError):
    """Dipole matrix element vanishes (parity selection rule)."""


class ConfigError(CavityQEDError, ValueError):
    """Invalid job configuration."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None,
                 column: int | None = None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.field = field
        self.line = line
        self.column = column
