"""This module contains the errors raised by the solver pipeline."""
from django.core.management.base import CommandError


class PoissonError(Exception):
    """Base class for every pipeline error."""


class DomainError(PoissonError):
    """Invalid domain geometry, qubit count or source parameters."""


class ZeroSourceError(PoissonError):
    """The source vanishes at every grid node and cannot be encoded."""


class NormalizationError(PoissonError):
    """Amplitudes handed to state preparation are not unit norm."""


class TruncationError(PoissonError):
    """Requested mode counts fall outside the available spectrum."""


class GridMismatchError(PoissonError):
    """Two solution fields live on different evaluation grids."""


class QuadratureError(PoissonError):
    """Invalid quadrature rule or subdivision count."""


class ConvergenceError(PoissonError):
    """The finite-difference solve missed its residual target."""


class ArtifactError(PoissonError):
    """Output files could not be written."""


class InvalidValueError(PoissonError, ValueError):
    """Malformed numbers handed to a pipeline stage."""


class UsageError(CommandError):
    """Bad command-line input; management commands exit with code 2."""

    def __init__(self, *args, returncode=2, **kwargs):
        super().__init__(*args, returncode=returncode, **kwargs)
