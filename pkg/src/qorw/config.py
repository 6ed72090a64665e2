"""Numerical tolerances, resource caps and error types shared by all modules."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    completeness: float = 1e-12
    hermitian: float = 1e-12
    trace: float = 1e-12
    psd_floor: float = 1e-10
    unitary: float = 1e-12
    kernel: float = 1e-12
    acf_imag: float = 1e-9
    moment_agreement: float = 1e-9
    normalization: float = 1e-10
    cli_residual: float = 1e-9


@dataclass(frozen=True)
class Caps:
    max_tensor_dim: int = 4096
    max_lattice_half_width: int = 512
    expm_max_terms: int = 64


TOL = Tolerances()
CAPS = Caps()


class QorwError(Exception):
    """Base class for errors raised by this package."""


class StructuralError(QorwError, ValueError):
    """Incompatible shapes or dimensions."""


class ParameterError(QorwError, ValueError):
    """A parameter is outside its admissible range."""


class UsageError(QorwError, TypeError):
    """An operation was called on an object it is not defined for."""


class ResourceError(QorwError, MemoryError):
    """A configured size cap would be exceeded."""


class LatticeTooSmallError(ResourceError):
    """Amplitude reached the guard band of a truncated lattice."""


class NumericError(QorwError, ArithmeticError):
    """A numerical self-check failed."""
