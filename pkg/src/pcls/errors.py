"""
Exceptions raised by the PC-LS library.

Each error carries the CLI exit code it maps to, so the command-line front
end can translate failures without a lookup table of its own.
"""

from typing import Optional


class PCLSError(Exception):
    """Base class for all library errors."""

    exit_code = 5


class DomainError(PCLSError, ValueError):
    """An argument lies outside the domain of an operation (e.g. t <= 0)."""

    exit_code = 2


class RangeError(PCLSError, ValueError):
    """A covariance evaluation overflowed the float range."""

    exit_code = 5

    def __init__(self, message: str, atom: Optional[int] = None):
        super().__init__(message)
        self.atom = atom


class NumericError(PCLSError):
    """An eigen-solver or factorization failed."""

    exit_code = 5


class CoverageError(PCLSError):
    """A frequency grid misses too much spectral mass."""

    exit_code = 5

    def __init__(self, message: str, tail_mass: float):
        super().__init__(message)
        self.tail_mass = tail_mass


class AlignmentError(PCLSError, ValueError):
    """A projection interval does not line up with the grid cells."""

    exit_code = 2


class NonPSDModel(PCLSError):
    """An assembled covariance is not positive semidefinite within tolerance."""

    exit_code = 3

    def __init__(self, message: str, min_eigenvalue: float):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class GridCapExceeded(PCLSError, ValueError):
    """A time grid has more points than the configured cap."""

    exit_code = 2


class UnsupportedMethod(PCLSError):
    """The requested simulation method cannot be used with this model."""

    exit_code = 4


class ReconstructionError(PCLSError):
    """A spectral reconstruction left an imaginary residue."""

    exit_code = 5


class LiftError(PCLSError):
    """The spectral lift of a PC sequence failed its round-trip check."""

    exit_code = 5


class SpecValidationError(PCLSError):
    """
    A model spec failed validation.

    Attributes:
        diagnostics: list of {"path": "pc.rho", "message": "..."} entries
    """

    exit_code = 2

    def __init__(self, diagnostics: list):
        self.diagnostics = diagnostics
        summary = "; ".join(f"{d['path']}: {d['message']}" for d in diagnostics)
        super().__init__(f"Invalid model spec: {summary}")
