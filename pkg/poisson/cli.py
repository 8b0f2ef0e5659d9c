"""This module contains the command-line front end shared by the management
commands: argument declaration, validation into a RunConfig and execution."""
import logging
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from decouple import Csv, RepositoryIni, strtobool
from django.conf import settings
from django.core.management import load_command_class
from django.core.management.base import BaseCommand, CommandError
from django.db import models

from .artifacts import write_artifacts
from .bench import run_benchmark, run_scaling_sweep, sweep_to_csv
from .classical import (QuadratureRule, QuadratureSpec, divide_by_eigenvalues,
                        quadrature_coefficients, solve_from_coefficients)
from .domain import (CENTERED_KINDS, HARMONIC_KINDS, SourceKind, SourceSpec,
                     build_grid, sample_source)
from .exceptions import DomainError, PoissonError, QuadratureError, UsageError
from .qsim import (QFTImpl, apply_qft_2d, counts_to_csv, measure_counts,
                   prepare_state, state_to_csv)
from .spectral import (DEFAULT_CORRECTION, CorrectionKind, CorrectionProfile,
                       Mode, Provenance, SignConvention, SolutionMeta,
                       amplitudes_to_coefficients, coefficients_to_csv,
                       counts_to_coefficients, estimate_spectrum,
                       estimate_to_csv, laplacian_eigenvalues, mse,
                       reconstruct, solution_to_csv, solution_to_gnuplot)

logger = logging.getLogger(__name__)

SEED_RANGE = (-(1 << 63), (1 << 64) - 1)
DEFAULT_CLASSICAL_MODES = 16


class CommandName(models.TextChoices):
    SOLVE = 'solve', 'quantum pipeline'
    CLASSICAL = 'classical', 'classical quadrature baseline'
    COMPARE = 'compare', 'quantum against classical'
    BENCH = 'bench', 'phase timing of both pipelines'
    SWEEP = 'sweep', 'bench over a range of qubit counts'
    LIST_SOURCES = 'list_sources', 'source catalog'


@dataclass(frozen=True)
class RunConfig:
    """Validated settings for one command invocation."""

    command: CommandName
    source: SourceSpec
    Lx: float = 1.0
    Ly: float = 1.0
    n: int = 5
    m: int = 5
    shots: int = 10_000
    seed: int = 42
    mode: Mode = Mode.SAMPLED
    correction: CorrectionProfile = CorrectionProfile()
    truncation: tuple = None
    sign: SignConvention = SignConvention.POISSON
    shift_enabled: bool = False
    quadrature: QuadratureSpec = QuadratureSpec()
    modes: tuple = (DEFAULT_CLASSICAL_MODES, DEFAULT_CLASSICAL_MODES)
    qft: QFTImpl = QFTImpl.CIRCUIT
    restore_norm: bool = False
    output_dir: Path = Path('output')
    repeat: int = 1
    parallel: bool = False
    track_memory: bool = True
    save: bool = False
    gnuplot: bool = False
    dump_state: bool = False
    sweep_qubits: tuple = (3, 8)
    max_qubits: int = 12

    def to_dict(self):
        data = asdict(self)
        data['source'] = {'kind': self.source.kind.value,
                          **self.source.parameters()}
        data['correction'] = self.correction.kind.value
        data['quadrature'] = {'rule': self.quadrature.rule.value,
                              'subdivisions': [self.quadrature.subdivisions_x,
                                               self.quadrature.subdivisions_y]}
        data['output_dir'] = str(self.output_dir)
        return data


@dataclass
class _Option:
    dest: str
    flags: tuple
    key: str
    cast: object = None
    kwargs: dict = field(default_factory=dict)


_PAIR = {'nargs': 2}

# flag, config-file key and argparse settings of every run option
_OPTIONS = [
    _Option('source', ('--source',), 'SOURCE', str,
            {'choices': SourceKind.values}),
    _Option('k1', ('--k1',), 'K1', int, {'type': int}),
    _Option('k2', ('--k2',), 'K2', int, {'type': int}),
    _Option('x0', ('--x0',), 'X0', float, {'type': float}),
    _Option('y0', ('--y0',), 'Y0', float, {'type': float}),
    _Option('lx', ('--lx',), 'LX', float, {'type': float}),
    _Option('ly', ('--ly',), 'LY', float, {'type': float}),
    _Option('qubits', ('--qubits',), 'QUBITS', Csv(int),
            {'type': int, 'metavar': ('N', 'M'), **_PAIR}),
    _Option('shots', ('--shots',), 'SHOTS', int, {'type': int}),
    _Option('seed', ('--seed',), 'SEED', int, {'type': int}),
    _Option('mode', ('--mode',), 'MODE', str, {'choices': Mode.values}),
    _Option('correction', ('--correction',), 'CORRECTION', str,
            {'choices': CorrectionKind.values}),
    _Option('truncation', ('--truncation',), 'TRUNCATION', Csv(int),
            {'type': int, 'metavar': ('TX', 'TY'), **_PAIR}),
    _Option('sign', ('--sign',), 'SIGN', str,
            {'choices': SignConvention.values}),
    _Option('quadrature', ('--quadrature',), 'QUADRATURE', str,
            {'choices': QuadratureRule.values}),
    _Option('subdivisions', ('--subdivisions',), 'SUBDIVISIONS', Csv(int),
            {'type': int, 'metavar': ('SX', 'SY'), **_PAIR}),
    _Option('modes', ('--modes',), 'MODES', Csv(int),
            {'type': int, 'metavar': ('KX', 'KY'), **_PAIR}),
    _Option('qft', ('--qft',), 'QFT', str, {'choices': QFTImpl.values}),
    _Option('output_dir', ('--output-dir',), 'OUTPUT_DIR', str, {}),
    _Option('repeat', ('--repeat',), 'REPEAT', int, {'type': int}),
    _Option('sweep_qubits', ('--sweep-qubits',), 'SWEEP_QUBITS', Csv(int),
            {'type': int, 'metavar': ('START', 'STOP'), **_PAIR}),
]

_SWITCHES = [
    ('shift', '--shift', 'SHIFT', "replace k by k + shift(k) before sampling"),
    ('restore_norm', '--restore-norm', 'RESTORE_NORM',
     "rescale coefficients to the source's discrete L2 norm"),
    ('parallel', '--parallel', 'PARALLEL', "run quadrature on a thread pool"),
    ('no_memory', '--no-memory', 'NO_MEMORY', "skip memory tracing"),
    ('save', '--save', 'SAVE', "store the bench report in the database"),
    ('gnuplot', '--gnuplot', 'GNUPLOT', "also write solution.dat"),
    ('dump_state', '--dump-state', 'DUMP_STATE', "also write state.csv"),
]


def add_run_arguments(parser):
    """Declare every run option on an argparse parser.

    Defaults stay None so that config-file values can fill the gaps.
    """
    parser.add_argument('--config', help="INI file with a [settings] section")
    for option in _OPTIONS:
        parser.add_argument(*option.flags, dest=option.dest, default=None,
                            **option.kwargs)
    for dest, flag, _, help_text in _SWITCHES:
        parser.add_argument(flag, dest=dest, action='store_true',
                            default=None, help=help_text)


def _read_config_file(path):
    if not path:
        return {}
    if not Path(path).is_file():
        raise UsageError(f"--config: no such file {path}")
    # read the INI alone; the environment does not take part in --config
    ini = RepositoryIni(path)
    if not ini.parser.has_section(ini.SECTION):
        raise UsageError(f"--config: {path} has no [{ini.SECTION}] section")
    values = {}
    for option in _OPTIONS:
        raw = _ini_value(ini, option.key)
        if raw:
            try:
                values[option.dest] = option.cast(raw)
            except ValueError as exc:
                raise UsageError(f"--config: bad {option.key} value "
                                 f"{raw!r}") from exc
    for dest, _, key, _ in _SWITCHES:
        raw = _ini_value(ini, key)
        if not raw:
            continue
        try:
            if strtobool(raw):
                values[dest] = True
        except ValueError as exc:
            raise UsageError(f"--config: bad {key} value {raw!r}") from exc
    return values


def _ini_value(ini, key):
    try:
        return ini[key].strip()
    except KeyError:
        return ''


def _pair(value, flag):
    if value is None:
        return None
    value = tuple(value)
    if len(value) != 2:
        raise UsageError(f"{flag}: expected two values, got {len(value)}")
    return value


def _choice(enum, raw, flag):
    try:
        return enum(raw)
    except ValueError as exc:
        raise UsageError(f"{flag}: invalid choice {raw!r}, expected one of "
                         f"{', '.join(enum.values)}") from exc


def _source_from(flag_value):
    kind = _choice(SourceKind, flag_value('source', SourceKind.SINUSOID),
                   '--source')
    harmonics = {name: flag_value(name) for name in ('k1', 'k2')}
    centers = {name: flag_value(name) for name in ('x0', 'y0')}
    if kind in HARMONIC_KINDS:
        for name, value in harmonics.items():
            if value is not None and value < 1:
                raise UsageError(f"--{name}: harmonic must be >= 1, got {value}")
        harmonics = {name: 1 if value is None else value
                     for name, value in harmonics.items()}
    else:
        for name, value in harmonics.items():
            if value is not None:
                raise UsageError(f"--{name}: {kind.value} takes no harmonics")
        harmonics = {'k1': None, 'k2': None}
    if kind in CENTERED_KINDS:
        centers = {name: 0.5 if value is None else value
                   for name, value in centers.items()}
    else:
        for name, value in centers.items():
            if value is not None:
                raise UsageError(f"--{name}: {kind.value} has no center")
        centers = {'x0': None, 'y0': None}
    try:
        return SourceSpec(kind, **harmonics, **centers)
    except DomainError as exc:
        raise UsageError(f"--source: {exc}") from exc


def build_config(command, options):
    """Validate parsed options into a RunConfig.

    Precedence is flag, then --config file, then project settings.
    """
    defaults = settings.QPOISSON
    from_file = _read_config_file(options.get('config'))

    def value(name, default=None):
        if options.get(name) is not None:
            return options[name]
        return from_file.get(name, default)

    max_qubits = defaults['MAX_QUBITS']
    source = _source_from(value)
    shift = bool(value('shift', False))
    if shift:
        source = source.shifted()

    lx, ly = value('lx', 1.0), value('ly', 1.0)
    for flag, length in (('--lx', lx), ('--ly', ly)):
        if not (math.isfinite(length) and length > 0):
            raise UsageError(f"{flag}: length must be finite and positive, "
                             f"got {length}")
    n, m = _pair(value('qubits'), '--qubits') or (5, 5)
    for count in (n, m):
        if not 1 <= count <= max_qubits:
            raise UsageError(f"--qubits: counts must lie in [1, {max_qubits}], "
                             f"got {n} {m}")
    size_x, size_y = 1 << n, 1 << m

    shots = value('shots', defaults['DEFAULT_SHOTS'])
    if shots < 1:
        raise UsageError(f"--shots: must be positive, got {shots}")
    seed = value('seed', defaults['DEFAULT_SEED'])
    if not SEED_RANGE[0] <= seed <= SEED_RANGE[1]:
        raise UsageError(f"--seed: must fit in 64 bits, got {seed}")

    truncation = _pair(value('truncation'), '--truncation')
    if truncation and not (1 <= truncation[0] <= size_x
                           and 1 <= truncation[1] <= size_y):
        raise UsageError(f"--truncation: must lie in [1, {size_x}] x "
                         f"[1, {size_y}], got {truncation[0]} {truncation[1]}")
    modes = (_pair(value('modes'), '--modes')
             or (min(DEFAULT_CLASSICAL_MODES, size_x),
                 min(DEFAULT_CLASSICAL_MODES, size_y)))
    if not (1 <= modes[0] <= size_x and 1 <= modes[1] <= size_y):
        raise UsageError(f"--modes: must lie in [1, {size_x}] x "
                         f"[1, {size_y}], got {modes[0]} {modes[1]}")

    subdivisions = _pair(value('subdivisions'), '--subdivisions') or (256, 256)
    try:
        quadrature = QuadratureSpec(
            _choice(QuadratureRule, value('quadrature', QuadratureRule.SIMPSON),
                    '--quadrature'),
            *subdivisions)
    except QuadratureError as exc:
        raise UsageError(f"--subdivisions: {exc}") from exc

    correction = value('correction')
    if correction:
        profile = CorrectionProfile(_choice(CorrectionKind, correction,
                                            '--correction'))
    else:
        profile = CorrectionProfile.for_source(source.kind)

    repeat = value('repeat', 1)
    if repeat < 1:
        raise UsageError(f"--repeat: must be positive, got {repeat}")
    sweep = _pair(value('sweep_qubits'), '--sweep-qubits')
    if sweep is None:
        sweep = (min(3, max_qubits), min(8, max_qubits))
    elif sweep[0] <= sweep[1] and not (1 <= sweep[0]
                                       and sweep[1] <= max_qubits):
        raise UsageError(f"--sweep-qubits: range must lie in [1, {max_qubits}], "
                         f"got {sweep[0]} {sweep[1]}")

    return RunConfig(
        command=CommandName(command),
        source=source,
        Lx=float(lx), Ly=float(ly), n=n, m=m,
        shots=shots, seed=seed,
        mode=_choice(Mode, value('mode', Mode.SAMPLED), '--mode'),
        correction=profile,
        truncation=truncation,
        sign=_choice(SignConvention, value('sign', SignConvention.POISSON),
                     '--sign'),
        shift_enabled=shift,
        quadrature=quadrature,
        modes=modes,
        qft=_choice(QFTImpl, value('qft', QFTImpl.CIRCUIT), '--qft'),
        restore_norm=bool(value('restore_norm', False)),
        output_dir=Path(value('output_dir', defaults['OUTPUT_DIR'])),
        repeat=repeat,
        parallel=bool(value('parallel', False)),
        track_memory=not value('no_memory', False),
        save=bool(value('save', False)),
        gnuplot=bool(value('gnuplot', False)),
        dump_state=bool(value('dump_state', False)),
        sweep_qubits=sweep,
        max_qubits=max_qubits,
    )


def parse_args(argv):
    """Parse `<command> [options]` into a validated RunConfig."""
    if not argv:
        raise UsageError(f"missing command, expected one of "
                         f"{', '.join(CommandName.values)}")
    name, *rest = argv
    if name not in CommandName.values:
        raise UsageError(f"unknown command {name!r}, expected one of "
                         f"{', '.join(CommandName.values)}")
    parser = load_command_class('poisson', name).create_parser('manage.py', name)
    try:
        options = parser.parse_args(rest)
    except CommandError as exc:
        raise UsageError(str(exc).removeprefix('Error: ')) from exc
    return build_config(name, vars(options))


def _grid(config):
    return build_grid(config.Lx, config.Ly, config.n, config.m,
                      config.max_qubits)


def run_quantum(config, grid):
    """Run the quantum pipeline; return its artifacts by stage."""
    source_field = sample_source(config.source, grid)
    transformed = apply_qft_2d(prepare_state(source_field), config.qft)
    counts = None
    if config.mode == Mode.SAMPLED:
        counts = measure_counts(transformed, config.shots, config.seed)
        a = counts_to_coefficients(counts, grid)
        provenance = Provenance(Mode.SAMPLED, config.shots, config.seed)
    else:
        a = amplitudes_to_coefficients(transformed)
        provenance = Provenance(Mode.EXACT)
    estimate = estimate_spectrum(a, grid, config.correction, provenance,
                                 source_field.norm2)
    tau_x, tau_y = config.truncation or grid.shape
    solution = reconstruct(estimate, tau_x=tau_x, tau_y=tau_y,
                           sign=config.sign, restore_norm=config.restore_norm,
                           source=config.source)
    return transformed, counts, estimate, solution


def run_classical(config, grid):
    coefficients = quadrature_coefficients(config.source, grid,
                                           config.quadrature, config.modes,
                                           parallel=config.parallel)
    meta = SolutionMeta(source=config.source, sign=SignConvention.POISSON,
                        method='classical-quadrature')
    solution = solve_from_coefficients(coefficients, grid, meta=meta)
    kx, ky = config.modes
    csv = coefficients_to_csv(coefficients, laplacian_eigenvalues(grid)[:kx, :ky],
                              divide_by_eigenvalues(coefficients, grid))
    return csv, solution


def _solve(config, out):
    grid = _grid(config)
    transformed, counts, estimate, solution = run_quantum(config, grid)
    out.write(f"solved {config.source} on {grid.N}x{grid.M} nodes "
              f"({estimate.provenance}, {config.correction.kind.value} "
              f"correction, truncation {solution.truncation})\n")
    files = {'solution.csv': solution_to_csv(solution),
             'coefficients.csv': estimate_to_csv(estimate)}
    if counts is not None:
        files['counts.csv'] = counts_to_csv(counts)
    if config.gnuplot:
        files['solution.dat'] = solution_to_gnuplot(solution)
    if config.dump_state:
        files['state.csv'] = state_to_csv(transformed)
    return files


def _classical(config, out):
    grid = _grid(config)
    csv, solution = run_classical(config, grid)
    out.write(f"classical {config.source} with {config.modes[0]}x"
              f"{config.modes[1]} modes, {config.quadrature.rule.value} "
              f"{config.quadrature.subdivisions_x}x"
              f"{config.quadrature.subdivisions_y}\n")
    files = {'solution.csv': solution_to_csv(solution), 'coefficients.csv': csv}
    if config.gnuplot:
        files['solution.dat'] = solution_to_gnuplot(solution)
    return files


def _compare(config, out):
    grid = _grid(config)
    _, _, estimate, quantum = run_quantum(config, grid)
    _, classical = run_classical(config, grid)
    error = mse(quantum, classical)
    logger.info("compare %s: mse %.6e", config.source, error)
    out.write(f"mse={error:.6e}\n")
    return {'solution.csv': solution_to_csv(quantum),
            'classical_solution.csv': solution_to_csv(classical),
            'coefficients.csv': estimate_to_csv(estimate)}


def _bench(config, out):
    report = run_benchmark(config)
    out.write(report.to_text())
    if config.save:
        from .models import BenchRun

        run = BenchRun.objects.create_from_report(report)
        out.write(f"saved as run {run.pk}\n")
    return {'report.json': report.to_json(),
            'coefficients.csv': estimate_to_csv(report.estimate),
            'solution.csv': solution_to_csv(report.quantum)}


def _sweep(config, out):
    start, stop = config.sweep_qubits
    reports = run_scaling_sweep(config, range(start, stop + 1))
    for report in reports:
        out.write(report.to_text())
    return {'sweep.csv': sweep_to_csv(reports)}


def _list_sources(config, out):
    for kind in SourceKind:
        spec_params = []
        if kind in HARMONIC_KINDS:
            spec_params += ['k1', 'k2']
        if kind in CENTERED_KINDS:
            spec_params += ['x0', 'y0']
        out.write(f"{kind.value:<24} {kind.label}\n"
                  f"{'':<24} params: {', '.join(spec_params) or '-'}; "
                  f"correction: {DEFAULT_CORRECTION[kind].value}\n")
    return {}


_HANDLERS = {
    CommandName.SOLVE: _solve,
    CommandName.CLASSICAL: _classical,
    CommandName.COMPARE: _compare,
    CommandName.BENCH: _bench,
    CommandName.SWEEP: _sweep,
    CommandName.LIST_SOURCES: _list_sources,
}


def execute(config, stdout=None, stderr=None):
    """Run the configured command and return its exit code."""
    out = stdout or sys.stdout
    err = stderr or sys.stderr
    try:
        files = _HANDLERS[config.command](config, out)
        if files:
            write_artifacts(config.output_dir, files)
    except PoissonError as exc:
        logger.error("%s failed: %s", config.command.value, exc)
        err.write(f"error: {exc}\n")
        return 1
    return 0


class PipelineCommand(BaseCommand):
    """Management command running one CommandName through execute()."""

    command = None

    def add_arguments(self, parser):
        add_run_arguments(parser)

    def handle(self, *args, **options):
        config = build_config(self.command, options)
        exit_code = execute(config, self.stdout, self.stderr)
        if exit_code:
            raise SystemExit(exit_code)
