"""This module turns measured (or exact) QFT amplitudes into sine-series
coefficients and reconstructs the solution of the Poisson problem."""
import logging
from dataclasses import dataclass, field

import numpy as np
from django.db import models

from .artifacts import FLOAT_FORMAT, matrix_to_gnuplot, table_to_csv
from .domain import SourceKind, sinpi
from .exceptions import GridMismatchError, InvalidValueError, TruncationError

logger = logging.getLogger(__name__)


class CorrectionKind(models.TextChoices):
    IDENTITY = 'identity', '1'
    SINUSOID = 'sinusoid', 'exp(-i pi (p+q)/2) (pq)^2/(p+q)^3'
    ANISOTROPIC = 'anisotropic', 'exp(-i pi (p+q)) (pq)^2/(p+q)^3'
    GAUSSIAN = 'gaussian', 'exp(-i pi pq/2)'
    MIXED = 'mixed', 'exp(-i pi pq) (pq)^2/(p^2+q^2)^(3/2)'


DEFAULT_CORRECTION = {
    SourceKind.SINUSOID: CorrectionKind.SINUSOID,
    SourceKind.POLYNOMIAL_BUMP: CorrectionKind.SINUSOID,
    SourceKind.ANISOTROPIC_SINUSOID: CorrectionKind.ANISOTROPIC,
    SourceKind.GAUSSIAN: CorrectionKind.GAUSSIAN,
    SourceKind.GAUSSIAN_PLUS_SINUSOID: CorrectionKind.MIXED,
}


class Mode(models.TextChoices):
    SAMPLED = 'sampled', 'shot-sampled counts'
    EXACT = 'exact', 'exact amplitudes'


class SignConvention(models.TextChoices):
    POISSON = 'poisson', 'u solves laplacian(u) = f'
    PLUS = 'plus', 'series summed with a plus sign'


@dataclass(frozen=True)
class CorrectionProfile:
    """Empirical per-mode multiplier restoring phase lost by measurement."""

    kind: CorrectionKind = CorrectionKind.IDENTITY

    def __post_init__(self):
        object.__setattr__(self, 'kind', CorrectionKind(self.kind))

    @classmethod
    def for_source(cls, kind):
        """Return the profile paired with a source kind."""
        return cls(DEFAULT_CORRECTION[SourceKind(kind)])

    def multipliers(self, shape):
        """Return the multiplier matrix for 1-based mode indices p, q."""
        p, q = np.meshgrid(np.arange(1, shape[0] + 1, dtype=float),
                           np.arange(1, shape[1] + 1, dtype=float),
                           indexing='ij')
        kind = self.kind
        if kind == CorrectionKind.IDENTITY:
            return np.ones(shape, dtype=complex)
        if kind == CorrectionKind.SINUSOID:
            return np.exp(-1j * np.pi * (p + q) / 2) * (p * q) ** 2 / (p + q) ** 3
        if kind == CorrectionKind.ANISOTROPIC:
            return np.exp(-1j * np.pi * (p + q)) * (p * q) ** 2 / (p + q) ** 3
        if kind == CorrectionKind.GAUSSIAN:
            return np.exp(-1j * np.pi * p * q / 2)
        return (np.exp(-1j * np.pi * p * q) * (p * q) ** 2
                / (p ** 2 + q ** 2) ** 1.5)


@dataclass(frozen=True)
class Provenance:
    """Where the coefficients came from."""

    mode: Mode
    shots: int = None
    seed: int = None

    def __str__(self):
        if self.mode == Mode.SAMPLED:
            return f"sampled(shots={self.shots}, seed={self.seed})"
        return str(Mode(self.mode).value)


@dataclass(frozen=True, eq=False)
class SpectrumEstimate:
    """Corrected modal coefficients and their eigenvalue quotients."""

    grid: object
    a: np.ndarray = field(repr=False)
    corrected: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    provenance: Provenance
    profile: CorrectionProfile = CorrectionProfile()
    source_norm: float = None


@dataclass(frozen=True)
class SolutionMeta:
    """Provenance of a reconstructed field."""

    source: object = None
    correction: CorrectionProfile = None
    provenance: object = None
    sign: SignConvention = SignConvention.POISSON
    method: str = 'quantum'


@dataclass(frozen=True, eq=False)
class SolutionField:
    """Values u(x_a, y_b) on the tensor grid given by x and y."""

    x: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    truncation: tuple
    meta: SolutionMeta = SolutionMeta()

    def __post_init__(self):
        if self.values.shape != (len(self.x), len(self.y)):
            raise GridMismatchError(
                f"values of shape {self.values.shape} do not match "
                f"{len(self.x)}x{len(self.y)} evaluation points")
        if not np.all(np.isfinite(self.values)):
            raise InvalidValueError("solution values must be finite")


def counts_to_coefficients(counts, grid):
    """Return a_kl = sqrt(C_kl / S) with zero phase."""
    if counts.shots < 1:
        raise InvalidValueError("counts must cover at least one shot")
    frequencies = counts.to_matrix(grid.shape) / counts.shots
    return np.sqrt(frequencies).astype(complex)


def amplitudes_to_coefficients(state):
    """Return the post-QFT amplitudes as a matrix, phases retained."""
    return state.as_matrix().copy()


def apply_correction(a, profile):
    """Multiply each coefficient by its profile multiplier."""
    if profile.kind == CorrectionKind.IDENTITY:
        return np.array(a, dtype=complex)
    return a * profile.multipliers(a.shape)


def laplacian_eigenvalues(grid):
    """Return lambda_ij = (pi (i+1) / Lx)^2 + (pi (j+1) / Ly)^2."""
    lam_x = (np.pi * np.arange(1, grid.N + 1) / grid.Lx) ** 2
    lam_y = (np.pi * np.arange(1, grid.M + 1) / grid.Ly) ** 2
    return lam_x[:, None] + lam_y[None, :]


def estimate_spectrum(a, grid, profile, provenance, source_norm=None):
    """Apply the correction profile and divide by the Laplacian eigenvalues."""
    corrected = apply_correction(a, profile)
    eigenvalues = laplacian_eigenvalues(grid)
    b = corrected / eigenvalues
    for array in (a, corrected, eigenvalues, b):
        array.setflags(write=False)
    return SpectrumEstimate(grid, a, corrected, eigenvalues, b, provenance,
                            profile, source_norm)


def sine_basis(points, length, count):
    """Return the matrix sin(pi (i+1) x_a / L) for i < count."""
    points = np.asarray(points, dtype=float)
    return sinpi(np.outer(points / length, np.arange(1, count + 1)))


def sine_series(coefficients, grid, x, y):
    """Return sum_ij c_ij sin(pi (i+1) x / Lx) sin(pi (j+1) y / Ly)."""
    tau_x, tau_y = coefficients.shape
    phi_x = sine_basis(x, grid.Lx, tau_x)
    phi_y = sine_basis(y, grid.Ly, tau_y)
    return phi_x @ coefficients @ phi_y.T


def _check_truncation(grid, tau_x, tau_y):
    if not (1 <= tau_x <= grid.N and 1 <= tau_y <= grid.M):
        raise TruncationError(
            f"truncation ({tau_x}, {tau_y}) outside [1, {grid.N}] x "
            f"[1, {grid.M}]")


def reconstruct(estimate, x=None, y=None, tau_x=None, tau_y=None,
                sign=SignConvention.POISSON, restore_norm=False, source=None):
    """Sum the truncated sine series of Re(corrected) / lambda.

    With `restore_norm` the retained real coefficients are rescaled so that
    their squared sum equals 4 ||f||^2 / (N M), the discrete Parseval value
    of the source the state was prepared from.
    """
    grid = estimate.grid
    tau_x = grid.N if tau_x is None else tau_x
    tau_y = grid.M if tau_y is None else tau_y
    _check_truncation(grid, tau_x, tau_y)
    x = grid.x if x is None else np.asarray(x, dtype=float)
    y = grid.y if y is None else np.asarray(y, dtype=float)
    retained = estimate.corrected[:tau_x, :tau_y].real
    if restore_norm:
        if estimate.source_norm is None:
            raise InvalidValueError("estimate carries no source norm to restore")
        energy = np.linalg.norm(retained)
        if energy > 0:
            target = 2 * estimate.source_norm / np.sqrt(grid.N * grid.M)
            retained = retained * (target / energy)
    coefficients = retained / estimate.eigenvalues[:tau_x, :tau_y]
    s = -1.0 if SignConvention(sign) == SignConvention.POISSON else 1.0
    values = s * sine_series(coefficients, grid, x, y)
    meta = SolutionMeta(source, estimate.profile, estimate.provenance,
                        SignConvention(sign))
    logger.debug("reconstructed %d modes on %dx%d points",
                 tau_x * tau_y, len(x), len(y))
    return SolutionField(x, y, values, (tau_x, tau_y), meta)


def mse(u, v):
    """Return the mean squared difference of two fields on one grid."""
    if (u.values.shape != v.values.shape
            or not np.allclose(u.x, v.x, rtol=0, atol=1e-12)
            or not np.allclose(u.y, v.y, rtol=0, atol=1e-12)):
        raise GridMismatchError(
            f"cannot compare a {u.values.shape} field with a "
            f"{v.values.shape} field on different points")
    return float(np.mean((u.values - v.values) ** 2))


def coefficients_to_csv(a, eigenvalues, b):
    """Return CSV `i,j,re_a,im_a,lambda,re_b,im_b` over the coefficient block."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    i, j = np.meshgrid(np.arange(a.shape[0]), np.arange(a.shape[1]),
                       indexing='ij')
    return table_to_csv(
        ['i', 'j', 're_a', 'im_a', 'lambda', 're_b', 'im_b'],
        [i.ravel(), j.ravel(), a.real.ravel(), a.imag.ravel(),
         np.asarray(eigenvalues).ravel(), b.real.ravel(), b.imag.ravel()],
        ['%d', '%d'] + [FLOAT_FORMAT] * 5)


def estimate_to_csv(estimate):
    return coefficients_to_csv(estimate.a, estimate.eigenvalues, estimate.b)


def solution_to_csv(solution):
    """Return CSV `x,y,u`, x outer."""
    x, y = np.meshgrid(solution.x, solution.y, indexing='ij')
    return table_to_csv(['x', 'y', 'u'],
                        [x.ravel(), y.ravel(), solution.values.ravel()],
                        [FLOAT_FORMAT] * 3)


def solution_to_gnuplot(solution):
    return matrix_to_gnuplot(solution.x, solution.y, solution.values)
