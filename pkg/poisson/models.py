"""This module contains the BenchRun and PhaseTiming models archiving
benchmark reports."""
from django.contrib import admin
from django.core.serializers.json import DjangoJSONEncoder
from django.db import models, transaction

from .bench import Phase, Pipeline
from .qsim import QFTImpl
from .spectral import Mode


class BenchRunManager(models.Manager):

    @transaction.atomic
    def create_from_report(self, report):
        """Store a BenchReport with one PhaseTiming per record."""
        config = report.config
        run = self.create(
            source=str(config.source),
            n=config.n,
            m=config.m,
            mode=config.mode,
            shots=config.shots if config.mode == Mode.SAMPLED else None,
            qft=config.qft,
            mse=report.mse,
            threads=report.threads,
            repeat=report.repeat,
            memory_method=report.memory_method,
            config=config.to_dict(),
        )
        PhaseTiming.objects.bulk_create(
            PhaseTiming(run=run, pipeline=record.pipeline, phase=record.phase,
                        seconds=record.wall_time,
                        bytes=record.peak_memory_delta)
            for record in report.records)
        return run


class BenchRun(models.Model):
    """One archived benchmark run."""

    created = models.DateTimeField('date run', auto_now_add=True)
    source = models.CharField(max_length=200)
    n = models.PositiveSmallIntegerField()
    m = models.PositiveSmallIntegerField()
    mode = models.CharField(max_length=16, choices=Mode.choices)
    shots = models.PositiveIntegerField(null=True, blank=True)
    qft = models.CharField(max_length=16, choices=QFTImpl.choices,
                           default=QFTImpl.CIRCUIT)
    mse = models.FloatField()
    threads = models.PositiveSmallIntegerField(default=1)
    repeat = models.PositiveSmallIntegerField(default=1)
    memory_method = models.CharField(max_length=32)
    config = models.JSONField(encoder=DjangoJSONEncoder, default=dict)

    objects = BenchRunManager()

    class Meta:
        ordering = ['-created', '-pk']

    def __str__(self):
        return f"{self.source} on {self.points} points"

    @property
    def points(self):
        return (1 << self.n) * (1 << self.m)

    def total_time(self, pipeline):
        """Return the summed seconds of one pipeline's phases."""
        return sum(t.seconds for t in self.timings.filter(pipeline=pipeline))

    @admin.display(description='Quantum speedup')
    def speedup(self):
        """Return classical over quantum total time, None if unmeasurable."""
        quantum = self.total_time(Pipeline.QUANTUM)
        if quantum <= 0:
            return None
        return self.total_time(Pipeline.CLASSICAL) / quantum

    def to_dict(self):
        return {
            'id': self.pk,
            'created': self.created,
            'source': self.source,
            'n': self.n,
            'm': self.m,
            'points': self.points,
            'mode': self.mode,
            'shots': self.shots,
            'qft': self.qft,
            'mse': self.mse,
            'threads': self.threads,
            'repeat': self.repeat,
            'memory_method': self.memory_method,
        }


class PhaseTiming(models.Model):
    """Wall time and peak memory of one phase of an archived run."""

    run = models.ForeignKey(BenchRun, on_delete=models.CASCADE,
                            related_name='timings')
    pipeline = models.CharField(max_length=16, choices=Pipeline.choices)
    phase = models.CharField(max_length=48, choices=Phase.choices)
    seconds = models.FloatField()
    bytes = models.BigIntegerField()

    class Meta:
        ordering = ['pk']

    def __str__(self):
        return f"{self.pipeline} {self.phase}: {self.seconds:.6f}s"
