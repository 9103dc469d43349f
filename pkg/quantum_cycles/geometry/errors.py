"""Exception hierarchy for the geometry layer.

Errors derive from ``Exception`` rather than ``ValueError`` so that pydantic
validators re-raise them unchanged instead of wrapping them.
"""

from typing import Any, Optional


class QuantumCyclesError(Exception):
    """Base class for all lab errors."""


class DomainError(QuantumCyclesError):
    """A point lies outside the chart or model it was evaluated on."""


class FlowEscapeError(QuantumCyclesError):
    """A Hamiltonian trajectory left the chart atlas."""

    def __init__(self, message: str, last_valid: Optional[Any] = None):
        super().__init__(message)
        self.last_valid = last_valid


class ResolutionError(QuantumCyclesError):
    """The grid or quadrature is too coarse for the requested evaluation."""


class UndefinedProjectionError(QuantumCyclesError):
    """Projection of a state onto a spectral subspace vanishes."""


class InvalidStructureError(QuantumCyclesError):
    """A hermitian weight or other structure is not admissible."""


class HolonomyUndefinedError(QuantumCyclesError):
    """A loop crosses a chart cut without winding bookkeeping."""


class DegenerateFiberError(QuantumCyclesError):
    """A fiber of a Lagrangian fibration is not regular."""


class ChartOverflowError(QuantumCyclesError):
    """A graph deformation leaves the tubular neighbourhood."""


class InvalidTangentError(QuantumCyclesError):
    """A moduli tangent violates the weighted zero-mean condition."""


class SolverError(QuantumCyclesError):
    """A linear solve failed or the system is singular."""


class LevelError(QuantumCyclesError):
    """A point is not Bohr-Sommerfeld at the level required."""


class ClosureError(QuantumCyclesError):
    """Parallel transport around a loop does not close."""

    def __init__(self, message: str, defect: float):
        super().__init__(message)
        self.defect = defect


class DegenerateImageError(QuantumCyclesError):
    """A pairing functional is numerically zero."""


class ScenarioError(QuantumCyclesError):
    """A scenario file cannot be parsed or validated."""
