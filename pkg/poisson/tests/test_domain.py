"""This module contains the tests for poisson.domain."""
import numpy as np
from django.test import SimpleTestCase

from poisson.domain import (Grid2D, SourceKind, SourceSpec, build_grid,
                            eval_source, field_to_csv, harmonic_shift,
                            sample_source)
from poisson.exceptions import DomainError, ZeroSourceError


class GridTests(SimpleTestCase):

    def test_nodes_start_at_origin_and_exclude_far_edge(self):
        """x_i = i Lx / N for i = 0..N-1."""
        grid = build_grid(2.0, 1.0, 2, 1)
        np.testing.assert_allclose(grid.x, [0.0, 0.5, 1.0, 1.5])
        np.testing.assert_allclose(grid.y, [0.0, 0.5])
        self.assertEqual(grid.shape, (4, 2))

    def test_nonpositive_length(self):
        """A zero or negative side length is a DomainError."""
        with self.assertRaises(DomainError):
            Grid2D(0.0, 1.0, 3, 3)
        with self.assertRaises(DomainError):
            build_grid(1.0, -1.0, 3, 3)

    def test_non_finite_length(self):
        """An infinite or NaN side length is a DomainError."""
        with self.assertRaises(DomainError):
            Grid2D(float('inf'), 1.0, 3, 3)
        with self.assertRaises(DomainError):
            build_grid(1.0, float('nan'), 3, 3)

    def test_qubit_cap(self):
        """Qubit counts above the cap are rejected."""
        with self.assertRaises(DomainError):
            build_grid(1.0, 1.0, 13, 5)
        build_grid(1.0, 1.0, 12, 1)


class SourceSpecTests(SimpleTestCase):

    def test_harmonic_kinds_need_both_harmonics(self):
        with self.assertRaises(DomainError):
            SourceSpec(SourceKind.SINUSOID, k1=2)

    def test_non_integer_harmonic(self):
        with self.assertRaises(DomainError):
            SourceSpec(SourceKind.SINUSOID, k1=1.5, k2=1)

    def test_bump_takes_no_parameters(self):
        with self.assertRaises(DomainError):
            SourceSpec(SourceKind.POLYNOMIAL_BUMP, k1=1, k2=1)
        with self.assertRaises(DomainError):
            SourceSpec(SourceKind.POLYNOMIAL_BUMP, x0=0.5, y0=0.5)

    def test_kind_accepts_plain_string(self):
        spec = SourceSpec('gaussian', x0=0.5, y0=0.25)
        self.assertIs(spec.kind, SourceKind.GAUSSIAN)
        self.assertEqual(str(spec), "gaussian(x0=0.5, y0=0.25)")

    def test_shifted(self):
        """Harmonics above 2 move to 2k - 2; others stay."""
        spec = SourceSpec(SourceKind.SINUSOID, k1=2, k2=5).shifted()
        self.assertEqual((spec.k1, spec.k2), (2, 8))
        bump = SourceSpec(SourceKind.POLYNOMIAL_BUMP)
        self.assertIs(bump.shifted(), bump)


class HarmonicShiftTests(SimpleTestCase):

    def test_values(self):
        self.assertEqual([harmonic_shift(k) for k in (1, 2, 3, 4, 7)],
                         [0, 0, 1, 2, 5])

    def test_rejects_zero(self):
        with self.assertRaises(DomainError):
            harmonic_shift(0)


class EvalSourceTests(SimpleTestCase):

    def test_anisotropic_value(self):
        """k1 = k2 = 3 at (0.5, 0.25): -1 * sin(0.75 pi) * 6.1875."""
        spec = SourceSpec(SourceKind.ANISOTROPIC_SINUSOID, k1=3, k2=3)
        self.assertAlmostEqual(eval_source(spec, 0.5, 0.25), -4.37522321,
                               places=7)

    def test_bump_center(self):
        spec = SourceSpec(SourceKind.POLYNOMIAL_BUMP)
        self.assertAlmostEqual(eval_source(spec, 0.5, 0.5), 1 / 16)

    def test_gaussian_plus_sinusoid(self):
        spec = SourceSpec(SourceKind.GAUSSIAN_PLUS_SINUSOID, k1=1, k2=1,
                          x0=0.5, y0=0.5)
        self.assertAlmostEqual(eval_source(spec, 0.5, 0.5), 2.0)

    def test_scalar_inputs_give_float(self):
        spec = SourceSpec(SourceKind.SINUSOID, k1=1, k2=1)
        self.assertIsInstance(eval_source(spec, 0.25, 0.5), float)

    def test_array_inputs_broadcast(self):
        spec = SourceSpec(SourceKind.SINUSOID, k1=1, k2=1)
        values = eval_source(spec, np.zeros((3, 1)), np.ones((1, 4)))
        self.assertEqual(values.shape, (3, 4))

    def test_shapes_vanish_on_rectangle_edges(self):
        """On a 1.5 x 2 rectangle f is zero along x = Lx and y = Ly."""
        grid = build_grid(1.5, 2.0, 3, 3)
        edge = np.linspace(0.0, 2.0, 7)
        for spec in (SourceSpec(SourceKind.SINUSOID, k1=3, k2=2),
                     SourceSpec(SourceKind.POLYNOMIAL_BUMP)):
            with self.subTest(spec=str(spec)):
                np.testing.assert_allclose(
                    eval_source(spec, grid.Lx, edge, grid.Lx, grid.Ly), 0.0,
                    atol=1e-12)
                np.testing.assert_allclose(
                    eval_source(spec, edge * 0.75, grid.Ly, grid.Lx, grid.Ly),
                    0.0, atol=1e-12)

    def test_scaled_bump_center(self):
        spec = SourceSpec(SourceKind.POLYNOMIAL_BUMP)
        self.assertAlmostEqual(eval_source(spec, 0.75, 1.0, 1.5, 2.0), 1 / 16)

    def test_gaussian_uses_physical_coordinates(self):
        spec = SourceSpec(SourceKind.GAUSSIAN, x0=1.0, y0=1.5)
        self.assertAlmostEqual(eval_source(spec, 1.0, 1.5, 1.5, 2.0), 1.0)


class SampleSourceTests(SimpleTestCase):

    def test_unit_norm_and_readonly(self):
        spec = SourceSpec(SourceKind.GAUSSIAN, x0=0.5, y0=0.5)
        field = sample_source(spec, build_grid(1.0, 1.0, 3, 4))
        self.assertAlmostEqual(np.linalg.norm(field.amplitudes), 1.0,
                               places=12)
        self.assertEqual(field.unflatten().shape, (8, 16))
        self.assertFalse(field.amplitudes.flags.writeable)
        self.assertAlmostEqual(field.norm2,
                               np.sqrt(np.sum(field.values ** 2)))

    def test_x_index_outer(self):
        """Amplitude i*M + j samples f(x_i, y_j)."""
        spec = SourceSpec(SourceKind.POLYNOMIAL_BUMP)
        grid = build_grid(1.0, 1.0, 2, 3)
        field = sample_source(spec, grid)
        expected = eval_source(spec, grid.x[1], grid.y[3]) / field.norm2
        self.assertAlmostEqual(field.amplitudes[1 * grid.M + 3].real, expected)

    def test_bump_is_zero_at_origin_node(self):
        field = sample_source(SourceSpec(SourceKind.POLYNOMIAL_BUMP),
                              build_grid(1.0, 1.0, 3, 3))
        self.assertEqual(field.amplitudes[0], 0)
        self.assertEqual(field.unflatten()[0].tolist(), [0] * 8)

    def test_rectangle_sampling_matches_eval_source(self):
        spec = SourceSpec(SourceKind.ANISOTROPIC_SINUSOID, k1=3, k2=3)
        grid = build_grid(1.5, 2.0, 3, 4)
        field = sample_source(spec, grid)
        expected = eval_source(spec, grid.x[5], grid.y[3], 1.5, 2.0)
        self.assertAlmostEqual(field.values[5, 3], expected)

    def test_vanishing_source(self):
        """sin(2 pi x) is zero on both nodes of a 2 x 2 grid."""
        spec = SourceSpec(SourceKind.SINUSOID, k1=2, k2=2)
        with self.assertRaises(ZeroSourceError):
            sample_source(spec, build_grid(1.0, 1.0, 1, 1))

    def test_field_csv(self):
        spec = SourceSpec(SourceKind.SINUSOID, k1=1, k2=1)
        text = field_to_csv(sample_source(spec, build_grid(1.0, 1.0, 1, 1)))
        lines = text.splitlines()
        self.assertEqual(lines[0], 'x,y,f')
        self.assertEqual(len(lines), 5)
