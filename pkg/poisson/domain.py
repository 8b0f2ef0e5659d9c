"""This module contains the domain geometry, the source catalog and the
normalization that turns a sampled source into an amplitude vector."""
import logging
from dataclasses import dataclass, field, replace

import numpy as np
from django.db import models

from .artifacts import FLOAT_FORMAT, table_to_csv
from .exceptions import DomainError, ZeroSourceError

logger = logging.getLogger(__name__)

MAX_QUBITS = 12
ZERO_NORM = 1e-300


class SourceKind(models.TextChoices):
    SINUSOID = 'sinusoid', 'sin(k1 pi x) sin(k2 pi y)'
    POLYNOMIAL_BUMP = 'polynomial-bump', 'x(1-x) y(1-y)'
    ANISOTROPIC_SINUSOID = ('anisotropic-sinusoid',
                            'sin(k1 pi x) sin(k2 pi y) '
                            '(x^2 + 2xy + 3y^2 - x + 4y + 5)')
    GAUSSIAN = 'gaussian', 'exp(-((x-x0)^2 + (y-y0)^2))'
    GAUSSIAN_PLUS_SINUSOID = ('gaussian-plus-sinusoid',
                              'exp(-((x-x0)^2 + (y-y0)^2)) '
                              '+ sin(k1 pi x) sin(k2 pi y)')


HARMONIC_KINDS = frozenset({SourceKind.SINUSOID,
                            SourceKind.ANISOTROPIC_SINUSOID,
                            SourceKind.GAUSSIAN_PLUS_SINUSOID})
CENTERED_KINDS = frozenset({SourceKind.GAUSSIAN,
                            SourceKind.GAUSSIAN_PLUS_SINUSOID})


@dataclass(frozen=True)
class Grid2D:
    """Rectangle [0, Lx) x [0, Ly) sampled on 2^n x 2^m nodes."""

    Lx: float
    Ly: float
    n: int
    m: int

    def __post_init__(self):
        lengths = (self.Lx, self.Ly)
        if not (all(np.isfinite(lengths)) and min(lengths) > 0):
            raise DomainError(f"domain lengths must be finite and positive, "
                              f"got Lx={self.Lx}, Ly={self.Ly}")
        if self.n < 1 or self.m < 1:
            raise DomainError(f"qubit counts must be at least 1, "
                              f"got n={self.n}, m={self.m}")

    @property
    def N(self):
        return 1 << self.n

    @property
    def M(self):
        return 1 << self.m

    @property
    def shape(self):
        return self.N, self.M

    @property
    def x(self):
        """Return x_i = i Lx / N for i = 0..N-1."""
        return np.arange(self.N) * (self.Lx / self.N)

    @property
    def y(self):
        """Return y_j = j Ly / M for j = 0..M-1."""
        return np.arange(self.M) * (self.Ly / self.M)


@dataclass(frozen=True)
class SourceSpec:
    """One entry of the source catalog with its parameters."""

    kind: SourceKind
    k1: int = None
    k2: int = None
    x0: float = None
    y0: float = None

    def __post_init__(self):
        kind = SourceKind(self.kind)
        object.__setattr__(self, 'kind', kind)
        harmonics = (self.k1, self.k2)
        centers = (self.x0, self.y0)
        if kind in HARMONIC_KINDS:
            if any(k is None for k in harmonics):
                raise DomainError(f"{kind.value} needs both k1 and k2")
            if any(int(k) != k or k < 1 for k in harmonics):
                raise DomainError(f"harmonics must be integers >= 1, "
                                  f"got k1={self.k1}, k2={self.k2}")
            object.__setattr__(self, 'k1', int(self.k1))
            object.__setattr__(self, 'k2', int(self.k2))
        elif any(k is not None for k in harmonics):
            raise DomainError(f"{kind.value} takes no harmonics")
        if kind in CENTERED_KINDS:
            if any(c is None for c in centers):
                raise DomainError(f"{kind.value} needs both x0 and y0")
            if not all(np.isfinite(centers)):
                raise DomainError("gaussian center must be finite")
        elif any(c is not None for c in centers):
            raise DomainError(f"{kind.value} takes no center")

    def shifted(self):
        """Return a copy with k replaced by k + harmonic_shift(k)."""
        if self.kind not in HARMONIC_KINDS:
            return self
        return replace(self,
                       k1=self.k1 + harmonic_shift(self.k1),
                       k2=self.k2 + harmonic_shift(self.k2))

    def parameters(self):
        """Return the parameters this kind uses, by name."""
        names = []
        if self.kind in HARMONIC_KINDS:
            names += ['k1', 'k2']
        if self.kind in CENTERED_KINDS:
            names += ['x0', 'y0']
        return {name: getattr(self, name) for name in names}

    def __str__(self):
        params = ', '.join(f"{k}={v}" for k, v in self.parameters().items())
        return f"{self.kind.value}({params})"


@dataclass(frozen=True, eq=False)
class SourceField:
    """Source sampled on the grid nodes, with its unit amplitude vector."""

    grid: Grid2D
    values: np.ndarray = field(repr=False)
    norm2: float
    amplitudes: np.ndarray = field(repr=False)

    def unflatten(self):
        """Return amplitudes as an N x M matrix, x index outer."""
        return self.amplitudes.reshape(self.grid.shape)


def build_grid(Lx, Ly, n, m, max_qubits=MAX_QUBITS):
    """Return the grid for an n-qubit x register and an m-qubit y register."""
    if not (1 <= n <= max_qubits and 1 <= m <= max_qubits):
        raise DomainError(f"qubit counts must lie in [1, {max_qubits}], "
                          f"got n={n}, m={m}")
    return Grid2D(float(Lx), float(Ly), int(n), int(m))


def sinpi(t):
    """Return sin(pi t), exactly zero at integer t."""
    t = np.asarray(t, dtype=float)
    return np.where(t == np.round(t), 0.0, np.sin(np.pi * t))


def _sinusoid(spec, xi, eta):
    return sinpi(spec.k1 * xi) * sinpi(spec.k2 * eta)


def _gaussian(spec, x, y):
    return np.exp(-((x - spec.x0) ** 2 + (y - spec.y0) ** 2))


def _evaluate(spec, x, y, Lx, Ly):
    # shapes use x / Lx and y / Ly; the gaussian stays in physical units
    xi, eta = x / Lx, y / Ly
    if spec.kind == SourceKind.SINUSOID:
        return _sinusoid(spec, xi, eta)
    if spec.kind == SourceKind.POLYNOMIAL_BUMP:
        return xi * (1 - xi) * eta * (1 - eta)
    if spec.kind == SourceKind.ANISOTROPIC_SINUSOID:
        weight = xi ** 2 + 2 * xi * eta + 3 * eta ** 2 - xi + 4 * eta + 5
        return _sinusoid(spec, xi, eta) * weight
    if spec.kind == SourceKind.GAUSSIAN:
        return _gaussian(spec, x, y)
    return _gaussian(spec, x, y) + _sinusoid(spec, xi, eta)


def eval_source(spec, x, y, Lx=1.0, Ly=1.0):
    """Return f(x, y) on the [0, Lx] x [0, Ly] rectangle; x and y may be
    arrays."""
    value = np.asarray(_evaluate(spec, np.asarray(x, dtype=float),
                                 np.asarray(y, dtype=float),
                                 float(Lx), float(Ly)))
    return value if value.ndim else float(value)


def harmonic_shift(m):
    """Return 0 for m <= 2 and m - 2 otherwise."""
    if m < 1:
        raise DomainError(f"harmonic index must be >= 1, got {m}")
    return 0 if m <= 2 else m - 2


def sample_source(spec, grid):
    """Sample the source on the grid nodes and normalize it to unit norm."""
    x, y = np.meshgrid(grid.x, grid.y, indexing='ij')
    values = np.asarray(eval_source(spec, x, y, grid.Lx, grid.Ly), dtype=float)
    norm2 = float(np.sqrt(np.sum(values ** 2)))
    if norm2 < ZERO_NORM:
        raise ZeroSourceError(f"{spec} vanishes at every node of the "
                              f"{grid.N}x{grid.M} grid")
    amplitudes = (values / norm2).ravel().astype(complex)
    values.setflags(write=False)
    amplitudes.setflags(write=False)
    logger.debug("sampled %s on %dx%d nodes, norm %.6g",
                 spec, grid.N, grid.M, norm2)
    return SourceField(grid, values, norm2, amplitudes)


def field_to_csv(source_field):
    """Return the sampled source as CSV `x,y,f`, x index outer."""
    grid = source_field.grid
    x, y = np.meshgrid(grid.x, grid.y, indexing='ij')
    return table_to_csv(['x', 'y', 'f'],
                        [x.ravel(), y.ravel(), source_field.values.ravel()],
                        [FLOAT_FORMAT] * 3)
