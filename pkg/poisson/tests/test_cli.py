"""This module contains the tests for poisson.cli and the management
commands."""
import io
import os
import tempfile
from pathlib import Path
from unittest import mock

from django.conf import settings
from django.core.management import call_command
from django.test import SimpleTestCase, TestCase, override_settings

from poisson.classical import QuadratureRule
from poisson.cli import CommandName, execute, parse_args
from poisson.domain import SourceKind
from poisson.exceptions import UsageError
from poisson.models import BenchRun
from poisson.qsim import QFTImpl
from poisson.spectral import CorrectionKind, Mode, SignConvention


class OutputDirMixin:

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def run_command(self, *argv):
        """Return (exit code, stdout, stderr) of one in-process run."""
        config = parse_args(list(argv) + ['--output-dir', str(self.out)])
        stdout, stderr = io.StringIO(), io.StringIO()
        code = execute(config, stdout, stderr)
        return code, stdout.getvalue(), stderr.getvalue()


class ParseArgsTests(OutputDirMixin, SimpleTestCase):

    def test_happy_path(self):
        config = parse_args(['solve', '--source', 'sinusoid', '--k1', '2',
                             '--k2', '2', '--qubits', '5', '5', '--shots',
                             '100000', '--seed', '7'])
        self.assertEqual(config.command, CommandName.SOLVE)
        self.assertEqual((config.source.k1, config.source.k2), (2, 2))
        self.assertEqual((config.n, config.m, config.shots, config.seed),
                         (5, 5, 100000, 7))

    def test_defaults(self):
        config = parse_args(['solve'])
        self.assertEqual(config.source.kind, SourceKind.SINUSOID)
        self.assertEqual((config.Lx, config.Ly, config.n, config.m),
                         (1.0, 1.0, 5, 5))
        self.assertEqual((config.shots, config.seed), (10_000, 42))
        self.assertEqual(config.mode, Mode.SAMPLED)
        self.assertEqual(config.correction.kind, CorrectionKind.SINUSOID)
        self.assertEqual(config.sign, SignConvention.POISSON)
        self.assertFalse(config.shift_enabled)
        self.assertEqual(config.modes, (16, 16))
        self.assertEqual(config.qft, QFTImpl.CIRCUIT)
        self.assertEqual(config.quadrature.rule, QuadratureRule.SIMPSON)

    def test_qubit_cap(self):
        with self.assertRaises(UsageError) as context:
            parse_args(['solve', '--qubits', '13', '5'])
        self.assertIn('--qubits', str(context.exception))
        self.assertEqual(context.exception.returncode, 2)

    def test_gaussian_gets_gaussian_correction(self):
        config = parse_args(['compare', '--source', 'gaussian', '--x0', '0.5',
                             '--y0', '0.5'])
        self.assertEqual(config.correction.kind, CorrectionKind.GAUSSIAN)

    def test_correction_can_be_forced(self):
        config = parse_args(['solve', '--source', 'anisotropic-sinusoid',
                             '--correction', 'identity'])
        self.assertEqual(config.correction.kind, CorrectionKind.IDENTITY)

    def test_errors_name_the_flag(self):
        cases = [
            (['solve', '--shots', 'many'], '--shots'),
            (['solve', '--shots', '0'], '--shots'),
            (['solve', '--seed', str(1 << 64)], '--seed'),
            (['solve', '--qubits', '3', '3', '--truncation', '9', '1'],
             '--truncation'),
            (['classical', '--qubits', '3', '3', '--modes', '4', '9'],
             '--modes'),
            (['solve', '--source', 'polynomial-bump', '--k1', '2'], '--k1'),
            (['solve', '--k2', '0'], '--k2'),
            (['solve', '--x0', '0.3'], '--x0'),
            (['classical', '--subdivisions', '63', '64'], '--subdivisions'),
            (['bench', '--repeat', '0'], '--repeat'),
            (['solve', '--lx', '0'], '--lx'),
            (['solve', '--lx', 'inf'], '--lx'),
            (['solve', '--ly', 'nan'], '--ly'),
            (['sweep', '--sweep-qubits', '3', '13'], '--sweep-qubits'),
            (['solve', '--mode', 'noisy'], '--mode'),
        ]
        for argv, flag in cases:
            with self.subTest(argv=argv):
                with self.assertRaises(UsageError) as context:
                    parse_args(argv)
                self.assertIn(flag, str(context.exception))

    def test_unknown_command(self):
        with self.assertRaises(UsageError):
            parse_args(['integrate'])
        with self.assertRaises(UsageError):
            parse_args([])

    def test_shift(self):
        config = parse_args(['solve', '--k1', '3', '--k2', '4', '--shift'])
        self.assertTrue(config.shift_enabled)
        self.assertEqual((config.source.k1, config.source.k2), (4, 6))

    def test_config_file_sits_between_flags_and_defaults(self):
        path = self.out / 'run.ini'
        path.write_text("[settings]\nQUBITS=4,3\nSHOTS=500\n"
                        "SOURCE=polynomial-bump\nRESTORE_NORM=True\n")
        config = parse_args(['solve', '--config', str(path), '--shots', '700'])
        self.assertEqual((config.n, config.m), (4, 3))
        self.assertEqual(config.shots, 700)
        self.assertEqual(config.source.kind, SourceKind.POLYNOMIAL_BUMP)
        self.assertTrue(config.restore_norm)
        self.assertEqual(config.seed, 42)

    def test_missing_config_file(self):
        with self.assertRaises(UsageError) as context:
            parse_args(['solve', '--config', str(self.out / 'absent.ini')])
        self.assertIn('--config', str(context.exception))

    @override_settings(QPOISSON={'OUTPUT_DIR': 'elsewhere', 'MAX_QUBITS': 4,
                                 'DEFAULT_SHOTS': 64, 'DEFAULT_SEED': 1})
    def test_settings_defaults(self):
        config = parse_args(['solve', '--qubits', '4', '4'])
        self.assertEqual(config.output_dir, Path('elsewhere'))
        self.assertEqual((config.shots, config.seed), (64, 1))
        with self.assertRaises(UsageError):
            parse_args(['solve', '--qubits', '5', '4'])


    @override_settings(QPOISSON={'OUTPUT_DIR': 'output', 'MAX_QUBITS': 6,
                                 'DEFAULT_SHOTS': 64, 'DEFAULT_SEED': 1})
    def test_default_sweep_range_follows_qubit_cap(self):
        config = parse_args(['solve'])
        self.assertEqual((config.n, config.m), (5, 5))
        self.assertEqual(config.sweep_qubits, (3, 6))
        with self.assertRaises(UsageError) as context:
            parse_args(['sweep', '--sweep-qubits', '3', '8'])
        self.assertIn('--sweep-qubits', str(context.exception))

    def test_config_file_ignores_environment(self):
        path = self.out / 'run.ini'
        path.write_text("[settings]\nSHOTS=500\n")
        with mock.patch.dict(os.environ, {'SHOTS': '7', 'MODE': 'exact',
                                          'SAVE': 'True'}):
            config = parse_args(['solve', '--config', str(path)])
        self.assertEqual(config.shots, 500)
        self.assertEqual(config.mode, Mode.SAMPLED)
        self.assertFalse(config.save)

    def test_config_file_errors(self):
        cases = [
            ("[other]\nSHOTS=5\n", 'no [settings] section'),
            ("[settings]\nSHOTS=five\n", 'SHOTS'),
            ("[settings]\nSAVE=perhaps\n", 'SAVE'),
        ]
        path = self.out / 'bad.ini'
        for text, message in cases:
            with self.subTest(text=text):
                path.write_text(text)
                with self.assertRaises(UsageError) as context:
                    parse_args(['solve', '--config', str(path)])
                self.assertIn(message, str(context.exception))

    def test_bundled_anisotropic_config(self):
        path = settings.BASE_DIR / 'data' / 'anisotropic.ini'
        config = parse_args(['solve', '--config', str(path)])
        self.assertEqual(config.source.kind, SourceKind.ANISOTROPIC_SINUSOID)
        self.assertEqual((config.source.k1, config.source.k2), (3, 3))
        self.assertEqual((config.n, config.m), (5, 5))
        self.assertEqual((config.shots, config.seed), (100_000, 7))
        self.assertEqual(config.truncation, (8, 8))
        self.assertEqual(config.correction.kind, CorrectionKind.ANISOTROPIC)

    def test_bundled_gaussian_bench_config(self):
        path = settings.BASE_DIR / 'data' / 'gaussian_bench.ini'
        config = parse_args(['bench', '--config', str(path)])
        self.assertEqual(config.source.kind, SourceKind.GAUSSIAN)
        self.assertEqual((config.source.x0, config.source.y0), (0.5, 0.5))
        self.assertEqual((config.n, config.m), (6, 6))
        self.assertEqual(config.mode, Mode.EXACT)
        self.assertEqual(config.modes, (16, 16))
        self.assertEqual(config.repeat, 3)
        self.assertEqual(config.correction.kind, CorrectionKind.GAUSSIAN)


class ExecuteTests(OutputDirMixin, SimpleTestCase):

    def test_compare_prints_mse_and_writes_three_files(self):
        code, stdout, _ = self.run_command('compare', '--k1', '2', '--k2', '2',
                                           '--mode', 'exact', '--qubits',
                                           '4', '4')
        self.assertEqual(code, 0)
        self.assertRegex(stdout, r'mse=\d\.\d+e[+-]\d+')
        self.assertEqual(sorted(p.name for p in self.out.iterdir()),
                         ['classical_solution.csv', 'coefficients.csv',
                          'solution.csv'])

    def test_solve_with_truncation(self):
        code, stdout, _ = self.run_command('solve', '--truncation', '8', '8',
                                           '--gnuplot', '--dump-state')
        self.assertEqual(code, 0)
        self.assertIn('truncation (8, 8)', stdout)
        names = {p.name for p in self.out.iterdir()}
        self.assertEqual(names, {'solution.csv', 'coefficients.csv',
                                 'counts.csv', 'solution.dat', 'state.csv'})
        rows = (self.out / 'solution.csv').read_text().splitlines()
        self.assertEqual(len(rows), 1 + 32 * 32)

    def test_exact_mode_ignores_seed(self):
        first = self.out / 'a'
        second = self.out / 'b'
        for seed, directory in ((1, first), (2, second)):
            config = parse_args(['solve', '--mode', 'exact', '--qubits', '3',
                                 '3', '--seed', str(seed), '--output-dir',
                                 str(directory)])
            self.assertEqual(execute(config, io.StringIO(), io.StringIO()), 0)
        self.assertFalse((first / 'counts.csv').exists())
        for name in ('solution.csv', 'coefficients.csv'):
            self.assertEqual((first / name).read_bytes(),
                             (second / name).read_bytes())

    def test_unwritable_output_dir(self):
        blocker = self.out / 'blocker'
        blocker.write_text('')
        config = parse_args(['solve', '--qubits', '3', '3', '--output-dir',
                             str(blocker / 'out')])
        stderr = io.StringIO()
        self.assertEqual(execute(config, io.StringIO(), stderr), 1)
        self.assertIn('error:', stderr.getvalue())
        self.assertEqual([p.name for p in self.out.iterdir()], ['blocker'])

    def test_pipeline_error_exits_one(self):
        """sin(2 pi x) vanishes on every node of a 2 x 2 grid."""
        code, _, stderr = self.run_command('solve', '--k1', '2', '--k2', '2',
                                           '--qubits', '1', '1')
        self.assertEqual(code, 1)
        self.assertIn('vanishes', stderr)
        self.assertEqual(list(self.out.iterdir()), [])

    def test_classical(self):
        code, stdout, _ = self.run_command('classical', '--source',
                                           'polynomial-bump', '--qubits', '3',
                                           '3', '--subdivisions', '64', '64')
        self.assertEqual(code, 0)
        self.assertIn('8x8 modes', stdout)
        lines = (self.out / 'coefficients.csv').read_text().splitlines()
        self.assertEqual(len(lines), 1 + 64)

    def test_bench_writes_report(self):
        code, stdout, _ = self.run_command('bench', '--qubits', '3', '3',
                                           '--subdivisions', '32', '32')
        self.assertEqual(code, 0)
        self.assertIn('Coefficient Calculation', stdout)
        self.assertTrue((self.out / 'report.json').is_file())

    def test_sweep(self):
        code, _, _ = self.run_command('sweep', '--sweep-qubits', '2', '3',
                                      '--subdivisions', '16', '16',
                                      '--no-memory')
        self.assertEqual(code, 0)
        rows = (self.out / 'sweep.csv').read_text().splitlines()
        self.assertEqual(len(rows), 1 + 2 * 7)

    def test_list_sources(self):
        code, stdout, _ = self.run_command('list_sources')
        self.assertEqual(code, 0)
        for kind in SourceKind:
            self.assertIn(kind.value, stdout)
        self.assertEqual(list(self.out.iterdir()), [])


class ManagementCommandTests(OutputDirMixin, TestCase):

    def test_call_solve(self):
        stdout = io.StringIO()
        call_command('solve', '--qubits', '3', '3', '--output-dir',
                     str(self.out), stdout=stdout)
        self.assertIn('solved sinusoid(k1=1, k2=1)', stdout.getvalue())

    def test_usage_error_propagates(self):
        with self.assertRaises(UsageError):
            call_command('solve', '--qubits', '13', '5')

    def test_pipeline_error_exits_with_code_one(self):
        with self.assertRaises(SystemExit) as context:
            call_command('solve', '--k1', '2', '--k2', '2', '--qubits', '1',
                         '1', '--output-dir', str(self.out),
                         stdout=io.StringIO(), stderr=io.StringIO())
        self.assertEqual(context.exception.code, 1)

    def test_bench_save(self):
        call_command('bench', '--qubits', '3', '3', '--subdivisions', '32',
                     '32', '--save', '--output-dir', str(self.out),
                     stdout=io.StringIO())
        run = BenchRun.objects.get()
        self.assertEqual(run.timings.count(), 7)
        self.assertEqual(run.points, 64)
        self.assertEqual(run.config['source']['kind'], 'sinusoid')
