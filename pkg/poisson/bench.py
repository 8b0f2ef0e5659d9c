"""This module times both pipelines phase by phase and reports wall time and
memory for each phase."""
import json
import logging
import os
import statistics
import time
import tracemalloc
from contextlib import contextmanager
from dataclasses import dataclass, field, replace

from django.core.serializers.json import DjangoJSONEncoder
from django.db import models

from .classical import divide_by_eigenvalues, quadrature_coefficients, series_field
from .domain import build_grid, sample_source
from .exceptions import InvalidValueError
from .qsim import apply_qft_2d, measure_counts, prepare_state
from .spectral import (Mode, Provenance, SolutionMeta,
                       amplitudes_to_coefficients, counts_to_coefficients,
                       estimate_spectrum, mse, reconstruct)

logger = logging.getLogger(__name__)

MEMORY_METHOD = 'tracemalloc-peak'


class Pipeline(models.TextChoices):
    CLASSICAL = 'classical', 'Classical'
    QUANTUM = 'quantum', 'Quantum'


class Phase(models.TextChoices):
    STATE_PREPARATION = 'state-preparation', 'State Preparation'
    COEFFICIENT_CALCULATION = 'coefficient-calculation', 'Coefficient Calculation'
    CORRECTION_AND_EIGENVALUE_DIVISION = ('correction-and-eigenvalue-division',
                                          'Correction and Eigenvalue Division')
    SOLUTION_RECONSTRUCTION = 'solution-reconstruction', 'Solution Reconstruction'
    INITIALIZATION = 'initialization', 'Initialization'
    FINAL_PHASE = 'final-phase', 'Final Phase'


PIPELINE_PHASES = {
    Pipeline.QUANTUM: (Phase.STATE_PREPARATION,
                       Phase.COEFFICIENT_CALCULATION,
                       Phase.CORRECTION_AND_EIGENVALUE_DIVISION,
                       Phase.SOLUTION_RECONSTRUCTION),
    Pipeline.CLASSICAL: (Phase.COEFFICIENT_CALCULATION,
                         Phase.CORRECTION_AND_EIGENVALUE_DIVISION,
                         Phase.SOLUTION_RECONSTRUCTION),
}

# memory is reported per stage as well, in the coarser three-stage grouping
STAGE_GROUPS = {
    Phase.INITIALIZATION.value: (Phase.STATE_PREPARATION,),
    'coefficient-processing': (Phase.COEFFICIENT_CALCULATION,
                               Phase.CORRECTION_AND_EIGENVALUE_DIVISION),
    Phase.FINAL_PHASE.value: (Phase.SOLUTION_RECONSTRUCTION,),
}


@dataclass(frozen=True)
class PhaseRecord:
    """Wall time and peak allocation of one phase of one pipeline."""

    pipeline: Pipeline
    phase: Phase
    wall_time: float
    peak_memory_delta: int

    def __post_init__(self):
        object.__setattr__(self, 'pipeline', Pipeline(self.pipeline))
        object.__setattr__(self, 'phase', Phase(self.phase))
        if self.wall_time < 0:
            raise InvalidValueError(f"negative wall time {self.wall_time}")
        allowed = PIPELINE_PHASES[self.pipeline]
        if self.phase not in allowed + (Phase.INITIALIZATION, Phase.FINAL_PHASE):
            raise InvalidValueError(f"{self.phase} is not a {self.pipeline} phase")


def percent_change(before, after):
    """Return 100 (after - before) / before, or None without a baseline."""
    if before is None or after is None or before <= 0:
        return None
    return 100.0 * (after - before) / before


@dataclass(frozen=True, eq=False)
class BenchReport:
    """Phase records of one benchmark run and the accuracy it reached.

    `qft_time` is the transform alone, measured inside the quantum
    coefficient phase and kept out of the totals.
    """

    config: object
    records: tuple
    mse: float
    threads: int = 1
    repeat: int = 1
    memory_method: str = MEMORY_METHOD
    qft_time: float = 0.0
    estimate: object = field(default=None, repr=False)
    quantum: object = field(default=None, repr=False)
    classical: object = field(default=None, repr=False)

    @property
    def points(self):
        return (1 << self.config.n) * (1 << self.config.m)

    def record(self, pipeline, phase):
        for record in self.records:
            if record.pipeline == pipeline and record.phase == phase:
                return record
        return None

    def _seconds(self, pipeline, phase):
        record = self.record(pipeline, phase)
        return record.wall_time if record else None

    @property
    def totals(self):
        """Return summed seconds and bytes per pipeline."""
        totals = {}
        for pipeline in Pipeline:
            records = [r for r in self.records if r.pipeline == pipeline]
            totals[pipeline.value] = {
                'seconds': sum(r.wall_time for r in records),
                'bytes': sum(r.peak_memory_delta for r in records),
            }
        return totals

    @property
    def changes(self):
        """Return the quantum time change against classical in percent, per
        phase and for the totals; None where classical has no such phase."""
        changes = {
            phase.value: percent_change(
                self._seconds(Pipeline.CLASSICAL, phase),
                self._seconds(Pipeline.QUANTUM, phase))
            for phase in PIPELINE_PHASES[Pipeline.QUANTUM]
        }
        totals = self.totals
        changes['total'] = percent_change(
            totals[Pipeline.CLASSICAL.value]['seconds'],
            totals[Pipeline.QUANTUM.value]['seconds'])
        return changes

    @property
    def shares(self):
        """Return each phase's percentage of its pipeline total."""
        shares = {}
        for pipeline, total in self.totals.items():
            seconds = total['seconds']
            shares[pipeline] = {
                r.phase.value: 100.0 * r.wall_time / seconds if seconds else 0.0
                for r in self.records if r.pipeline == pipeline
            }
        return shares

    @property
    def memory_by_stage(self):
        """Return bytes per pipeline in the Initialization /
        Coefficient Processing / Final Phase grouping."""
        grouped = {}
        for pipeline in Pipeline:
            grouped[pipeline.value] = {
                stage: sum(r.peak_memory_delta for r in self.records
                           if r.pipeline == pipeline and r.phase in phases)
                for stage, phases in STAGE_GROUPS.items()
            }
        return grouped

    def to_dict(self):
        return {
            'config': self.config.to_dict(),
            'points': self.points,
            'records': [{'pipeline': r.pipeline.value, 'phase': r.phase.value,
                         'seconds': r.wall_time,
                         'bytes': r.peak_memory_delta}
                        for r in self.records],
            'totals': self.totals,
            'changes': self.changes,
            'shares': self.shares,
            'qft_seconds': self.qft_time,
            'memory_by_stage': self.memory_by_stage,
            'stage_mapping': {stage: [p.value for p in phases]
                              for stage, phases in STAGE_GROUPS.items()},
            'mse': self.mse,
            'threads': self.threads,
            'repeat': self.repeat,
            'memory_method': self.memory_method,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), cls=DjangoJSONEncoder, indent=2) + '\n'

    def to_text(self):
        """Return the report as aligned columns, one row per phase."""
        lines = [f"{'phase':<36}{'classical (s)':>15}{'quantum (s)':>15}"
                 f"{'change (%)':>12}{'classical %':>13}{'quantum %':>11}"
                 f"{'classical (B)':>15}{'quantum (B)':>15}"]
        changes = self.changes
        shares = self.shares
        for phase in PIPELINE_PHASES[Pipeline.QUANTUM]:
            seconds = [self._seconds(p, phase)
                       for p in (Pipeline.CLASSICAL, Pipeline.QUANTUM)]
            cells = [_cell(s, 15, '.6f') for s in seconds]
            cells.append(_cell(changes[phase.value], 12, '+.1f'))
            cells += [_cell(shares[p.value].get(phase.value), width, '.1f')
                      for p, width in ((Pipeline.CLASSICAL, 13),
                                       (Pipeline.QUANTUM, 11))]
            for pipeline in (Pipeline.CLASSICAL, Pipeline.QUANTUM):
                record = self.record(pipeline, phase)
                cells.append(_cell(record and record.peak_memory_delta, 15, 'd'))
            lines.append(f"{phase.label:<36}" + ''.join(cells))
        totals = self.totals
        lines.append(f"{'Total':<36}"
                     f"{totals['classical']['seconds']:>15.6f}"
                     f"{totals['quantum']['seconds']:>15.6f}"
                     f"{_cell(changes['total'], 12, '+.1f')}"
                     f"{100.0:>13.1f}{100.0:>11.1f}"
                     f"{totals['classical']['bytes']:>15d}"
                     f"{totals['quantum']['bytes']:>15d}")
        lines.append(f"qft={self.qft_time:.6f}s (inside quantum "
                     f"{Phase.COEFFICIENT_CALCULATION.label}, not in totals)")
        lines.append(f"points={self.points} mse={self.mse:.6e} "
                     f"threads={self.threads} repeat={self.repeat} "
                     f"memory={self.memory_method}")
        return '\n'.join(lines) + '\n'


def _cell(value, width, spec):
    text = 'N/A' if value is None else format(value, spec)
    return text.rjust(width)


class PhaseTimer:
    """Collect PhaseRecords with a monotonic nanosecond clock."""

    def __init__(self, track_memory=True):
        self.track_memory = track_memory
        self.records = []

    @contextmanager
    def phase(self, pipeline, phase):
        baseline = 0
        if self.track_memory:
            tracemalloc.reset_peak()
            baseline = tracemalloc.get_traced_memory()[0]
        start = time.perf_counter_ns()
        yield
        elapsed = time.perf_counter_ns() - start
        peak = 0
        if self.track_memory:
            peak = max(tracemalloc.get_traced_memory()[1] - baseline, 0)
        self.records.append(PhaseRecord(pipeline, phase, elapsed / 1e9, peak))


def _run_once(config, grid, timer, workers):
    quantum_phases = PIPELINE_PHASES[Pipeline.QUANTUM]
    source = config.source
    with timer.phase(Pipeline.QUANTUM, quantum_phases[0]):
        source_field = sample_source(source, grid)
        state = prepare_state(source_field)
    with timer.phase(Pipeline.QUANTUM, quantum_phases[1]):
        start = time.perf_counter_ns()
        transformed = apply_qft_2d(state, config.qft)
        qft_time = (time.perf_counter_ns() - start) / 1e9
        if config.mode == Mode.SAMPLED:
            counts = measure_counts(transformed, config.shots, config.seed)
            a = counts_to_coefficients(counts, grid)
            provenance = Provenance(Mode.SAMPLED, config.shots, config.seed)
        else:
            a = amplitudes_to_coefficients(transformed)
            provenance = Provenance(Mode.EXACT)
    with timer.phase(Pipeline.QUANTUM, quantum_phases[2]):
        estimate = estimate_spectrum(a, grid, config.correction, provenance,
                                     source_field.norm2)
    tau_x, tau_y = config.truncation or grid.shape
    with timer.phase(Pipeline.QUANTUM, quantum_phases[3]):
        quantum = reconstruct(estimate, tau_x=tau_x, tau_y=tau_y,
                              sign=config.sign,
                              restore_norm=config.restore_norm, source=source)

    with timer.phase(Pipeline.CLASSICAL, Phase.COEFFICIENT_CALCULATION):
        coefficients = quadrature_coefficients(
            source, grid, config.quadrature, config.modes,
            parallel=config.parallel, workers=workers)
    with timer.phase(Pipeline.CLASSICAL,
                     Phase.CORRECTION_AND_EIGENVALUE_DIVISION):
        b = divide_by_eigenvalues(coefficients, grid)
    with timer.phase(Pipeline.CLASSICAL, Phase.SOLUTION_RECONSTRUCTION):
        classical = series_field(b, grid, meta=SolutionMeta(
            source=source, method='classical-quadrature'))
    return qft_time, (estimate, quantum, classical)


def run_benchmark(config):
    """Run both pipelines on the configured source and grid, timing each phase.

    With config.repeat > 1 each phase reports the median over the runs.
    """
    grid = build_grid(config.Lx, config.Ly, config.n, config.m,
                      config.max_qubits)
    workers = (os.cpu_count() or 1) if config.parallel else 1
    repeat = max(int(config.repeat), 1)
    runs = []
    qft_times = []
    outcome = None
    tracing = config.track_memory and not tracemalloc.is_tracing()
    if tracing:
        tracemalloc.start()
    try:
        for _ in range(repeat):
            timer = PhaseTimer(track_memory=config.track_memory)
            qft_time, outcome = _run_once(config, grid, timer, workers)
            qft_times.append(qft_time)
            runs.append(timer.records)
    finally:
        if tracing:
            tracemalloc.stop()
    records = tuple(
        PhaseRecord(first.pipeline, first.phase,
                    statistics.median(run[i].wall_time for run in runs),
                    int(statistics.median(run[i].peak_memory_delta
                                          for run in runs)))
        for i, first in enumerate(runs[0]))
    estimate, quantum, classical = outcome
    report = BenchReport(config, records, mse(quantum, classical),
                         threads=workers, repeat=repeat,
                         qft_time=statistics.median(qft_times),
                         estimate=estimate, quantum=quantum,
                         classical=classical)
    totals = report.totals
    logger.info("bench %dx%d %s: classical %.4fs, quantum %.4fs "
                "(qft %.4fs), mse %.3e",
                grid.N, grid.M, config.source, totals['classical']['seconds'],
                totals['quantum']['seconds'], report.qft_time, report.mse)
    return report


def run_scaling_sweep(config, qubit_range, shots=None, seed=None):
    """Return one report per n = m in qubit_range, other settings from config.

    Classical mode counts and truncation are clamped to each grid.
    """
    reports = []
    for qubits in qubit_range:
        size = 1 << qubits
        modes = tuple(min(k, size) for k in config.modes)
        truncation = (tuple(min(t, size) for t in config.truncation)
                      if config.truncation else None)
        step = replace(config, n=qubits, m=qubits, modes=modes,
                       truncation=truncation,
                       shots=config.shots if shots is None else shots,
                       seed=config.seed if seed is None else seed)
        reports.append(run_benchmark(step))
    return reports


def sweep_to_csv(reports):
    """Return CSV `points,phase,pipeline,seconds,bytes`, one row per record."""
    rows = [(report.points, record.phase.value, record.pipeline.value,
             record.wall_time, record.peak_memory_delta)
            for report in reports for record in report.records]
    header = 'points,phase,pipeline,seconds,bytes\n'
    return header + ''.join(f"{p},{ph},{pl},{s!r},{b}\n"
                            for p, ph, pl, s, b in rows)
