"""This module contains the admin pages of the benchmark archive."""
from django.contrib import admin

from .models import BenchRun, PhaseTiming


class PhaseTimingInline(admin.TabularInline):
    model = PhaseTiming
    extra = 0


class BenchRunAdmin(admin.ModelAdmin):
    fieldsets = [
        (None, {'fields': ['source', 'n', 'm', 'mse']}),
        ('Pipeline settings', {'fields': ['mode', 'shots', 'qft', 'threads',
                                          'repeat', 'memory_method'],
                               'classes': ['collapse']}),
        ('Full configuration', {'fields': ['config'],
                                'classes': ['collapse']}),
    ]
    inlines = [PhaseTimingInline]
    list_display = ('source', 'n', 'm', 'mode', 'mse', 'speedup', 'created')
    list_filter = ['mode', 'qft', 'created']
    search_fields = ['source']


admin.site.register(BenchRun, BenchRunAdmin)
