"""This module contains the classical baselines: quadrature of the sine
coefficients, a discrete sine transform path and a finite-difference solver
used as an independent oracle."""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from django.db import models
from scipy import fft, integrate, sparse
from scipy.sparse import linalg

from .domain import eval_source, sample_source, sinpi
from .exceptions import (ConvergenceError, DomainError, QuadratureError,
                         TruncationError)
from .spectral import (SignConvention, SolutionField, SolutionMeta,
                       laplacian_eigenvalues, sine_series)

logger = logging.getLogger(__name__)

MIN_SUBDIVISIONS = 8
MIN_RESOLUTION = 16
RESIDUAL_TARGET = 1e-10


class QuadratureRule(models.TextChoices):
    TRAPEZOID = 'trapezoid', 'composite trapezoid'
    SIMPSON = 'simpson', 'composite Simpson'


_INTEGRATORS = {
    QuadratureRule.TRAPEZOID: integrate.trapezoid,
    QuadratureRule.SIMPSON: integrate.simpson,
}


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite rule and per-axis subdivision counts."""

    rule: QuadratureRule = QuadratureRule.SIMPSON
    subdivisions_x: int = 256
    subdivisions_y: int = 256

    def __post_init__(self):
        try:
            object.__setattr__(self, 'rule', QuadratureRule(self.rule))
        except ValueError as exc:
            raise QuadratureError(f"unknown quadrature rule {self.rule!r}") from exc
        subdivisions = (self.subdivisions_x, self.subdivisions_y)
        if min(subdivisions) < MIN_SUBDIVISIONS:
            raise QuadratureError(f"need at least {MIN_SUBDIVISIONS} "
                                  f"subdivisions per axis, got {subdivisions}")
        if self.rule == QuadratureRule.SIMPSON and any(s % 2 for s in subdivisions):
            raise QuadratureError(f"Simpson needs even subdivisions, "
                                  f"got {subdivisions}")

    def nodes(self, grid):
        """Return the closed quadrature meshes along x and y."""
        return (np.linspace(0.0, grid.Lx, self.subdivisions_x + 1),
                np.linspace(0.0, grid.Ly, self.subdivisions_y + 1))

    def integrate(self, values, xs, ys):
        """Integrate samples values[a][b] = g(xs[a], ys[b])."""
        rule = _INTEGRATORS[self.rule]
        return float(rule(rule(values, x=ys, axis=1), x=xs))


def _check_modes(grid, modes):
    kx, ky = modes
    if not (1 <= kx <= grid.N and 1 <= ky <= grid.M):
        raise TruncationError(f"modes ({kx}, {ky}) outside [1, {grid.N}] x "
                              f"[1, {grid.M}]")


def quadrature_coefficient(spec, kx, ky, grid, quad):
    """Return 4 / (Lx Ly) times the integral of f phi_{kx,ky} over the domain."""
    if kx < 1 or ky < 1:
        raise DomainError(f"modes start at 1, got ({kx}, {ky})")
    xs, ys = quad.nodes(grid)
    f = eval_source(spec, xs[:, None], ys[None, :], grid.Lx, grid.Ly)
    integrand = f * np.outer(sinpi(kx * xs / grid.Lx), sinpi(ky * ys / grid.Ly))
    return 4.0 / (grid.Lx * grid.Ly) * quad.integrate(integrand, xs, ys)


def quadrature_coefficients(spec, grid, quad, modes, parallel=False,
                            workers=None):
    """Return the Kx x Ky coefficient matrix, one quadrature per mode pair.

    The source is sampled once on the quadrature mesh; each coefficient is
    then integrated independently, rows spread over a thread pool when
    `parallel` is set.
    """
    _check_modes(grid, modes)
    kx_count, ky_count = modes
    xs, ys = quad.nodes(grid)
    f = eval_source(spec, xs[:, None], ys[None, :], grid.Lx, grid.Ly)
    sin_x = sinpi(np.outer(np.arange(1, kx_count + 1), xs / grid.Lx))
    sin_y = sinpi(np.outer(np.arange(1, ky_count + 1), ys / grid.Ly))
    scale = 4.0 / (grid.Lx * grid.Ly)

    def row(kx):
        weighted = f * sin_x[kx][:, None]
        return [scale * quad.integrate(weighted * sin_y[ky][None, :], xs, ys)
                for ky in range(ky_count)]

    if parallel:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row, range(kx_count)))
    else:
        rows = [row(kx) for kx in range(kx_count)]
    logger.debug("integrated %d coefficients with %s %dx%d",
                 kx_count * ky_count, quad.rule.value,
                 quad.subdivisions_x, quad.subdivisions_y)
    return np.array(rows)


def divide_by_eigenvalues(coefficients, grid):
    kx_count, ky_count = coefficients.shape
    return coefficients / laplacian_eigenvalues(grid)[:kx_count, :ky_count]


def series_field(b, grid, x=None, y=None, meta=None):
    """Return u = -sum b_k phi_k on the evaluation points."""
    x = grid.x if x is None else np.asarray(x, dtype=float)
    y = grid.y if y is None else np.asarray(y, dtype=float)
    values = -sine_series(b, grid, x, y)
    return SolutionField(x, y, values, b.shape,
                         meta or SolutionMeta(method='classical'))


def solve_from_coefficients(coefficients, grid, x=None, y=None, meta=None):
    """Return u = -sum a_k / lambda_k phi_k for the given coefficient block."""
    return series_field(divide_by_eigenvalues(coefficients, grid), grid, x, y,
                        meta)


def classical_solve(spec, grid, quad, modes, x=None, y=None, parallel=False):
    """Solve by direct quadrature of the first Kx x Ky sine coefficients."""
    coefficients = quadrature_coefficients(spec, grid, quad, modes, parallel)
    meta = SolutionMeta(source=spec, sign=SignConvention.POISSON,
                        method='classical-quadrature')
    return solve_from_coefficients(coefficients, grid, x, y, meta)


def dst_coefficients(source_field):
    """Return sine coefficients from a type-I DST of the interior samples.

    Entry [i][j] approximates the coefficient of mode (i+1, j+1); the last
    row and column (modes N and M) vanish on every node and are left zero.
    """
    grid = source_field.grid
    interior = np.asarray(source_field.values)[1:, 1:]
    coefficients = np.zeros(grid.shape)
    coefficients[:-1, :-1] = fft.dstn(interior, type=1) / (grid.N * grid.M)
    return coefficients


def dst_solve(spec, grid, modes, x=None, y=None):
    """Solve with coefficients from the discrete sine transform."""
    _check_modes(grid, modes)
    coefficients = dst_coefficients(sample_source(spec, grid))
    meta = SolutionMeta(source=spec, sign=SignConvention.POISSON,
                        method='classical-dst')
    return solve_from_coefficients(coefficients[:modes[0], :modes[1]], grid,
                                   x, y, meta)


def _second_difference(points, spacing):
    return sparse.diags([1.0, -2.0, 1.0], [-1, 0, 1],
                        shape=(points, points)) / spacing ** 2


def fd_poisson_solve(source, resolution, Lx=1.0, Ly=1.0):
    """Solve laplacian(u) = f, u = 0 on the boundary, with the 5-point stencil.

    `source` is a SourceSpec or a callable f(x, y). The result lives on the
    (resolution + 1)^2 nodes of the closed rectangle.
    """
    if resolution < MIN_RESOLUTION:
        raise DomainError(f"resolution must be >= {MIN_RESOLUTION}, "
                          f"got {resolution}")
    x = np.linspace(0.0, Lx, resolution + 1)
    y = np.linspace(0.0, Ly, resolution + 1)
    inner = resolution - 1
    f = source if callable(source) else (
        lambda s, t: eval_source(source, s, t, Lx, Ly))
    rhs = np.asarray(f(x[1:-1, None], y[None, 1:-1]), dtype=float).ravel()
    laplacian = (sparse.kron(_second_difference(inner, Lx / resolution),
                             sparse.identity(inner))
                 + sparse.kron(sparse.identity(inner),
                               _second_difference(inner, Ly / resolution)))
    laplacian = laplacian.tocsc()
    u = linalg.spsolve(laplacian, rhs)
    scale = max(np.linalg.norm(rhs), np.finfo(float).tiny)
    residual = np.linalg.norm(laplacian @ u - rhs) / scale
    if residual > RESIDUAL_TARGET:
        raise ConvergenceError(f"finite-difference residual {residual:.3e} "
                               f"exceeds {RESIDUAL_TARGET:g}")
    values = np.zeros((resolution + 1, resolution + 1))
    values[1:-1, 1:-1] = u.reshape(inner, inner)
    logger.debug("finite-difference solve on %d unknowns, residual %.2e",
                 inner * inner, residual)
    meta = SolutionMeta(source=None if callable(source) else source,
                        sign=SignConvention.POISSON,
                        method='finite-difference')
    return SolutionField(x, y, values, (inner, inner), meta)
