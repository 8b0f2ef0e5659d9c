"""This module contains the read-only JSON views of the benchmark archive."""
from django.http import JsonResponse
from django.views import generic

from .bench import Pipeline
from .models import BenchRun

LATEST_RUNS = 20


class IndexView(generic.View):
    """Latest archived runs."""

    def get(self, request):
        runs = BenchRun.objects.all()[:LATEST_RUNS]
        return JsonResponse({'runs': [run.to_dict() for run in runs]})


class DetailView(generic.View):
    """One archived run with its phase timings and totals."""

    def get(self, request, pk):
        try:
            run = BenchRun.objects.get(pk=pk)
        except BenchRun.DoesNotExist:
            return JsonResponse({'error': f"no bench run {pk}"}, status=404)
        data = run.to_dict()
        data['config'] = run.config
        data['records'] = [{'pipeline': t.pipeline, 'phase': t.phase,
                            'seconds': t.seconds, 'bytes': t.bytes}
                           for t in run.timings.all()]
        data['totals'] = {pipeline.value: run.total_time(pipeline)
                          for pipeline in Pipeline}
        return JsonResponse(data)
