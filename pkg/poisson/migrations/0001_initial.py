import django.core.serializers.json
import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="BenchRun",
            fields=[
                ("id", models.BigAutoField(auto_created=True, primary_key=True,
                                           serialize=False, verbose_name="ID")),
                ("created", models.DateTimeField(auto_now_add=True,
                                                 verbose_name="date run")),
                ("source", models.CharField(max_length=200)),
                ("n", models.PositiveSmallIntegerField()),
                ("m", models.PositiveSmallIntegerField()),
                ("mode", models.CharField(
                    choices=[("sampled", "shot-sampled counts"),
                             ("exact", "exact amplitudes")],
                    max_length=16)),
                ("shots", models.PositiveIntegerField(blank=True, null=True)),
                ("qft", models.CharField(
                    choices=[("circuit", "Hadamard and controlled-phase gates"),
                             ("dense", "dense DFT matrix per register"),
                             ("fft", "FFT fast path")],
                    default="circuit", max_length=16)),
                ("mse", models.FloatField()),
                ("threads", models.PositiveSmallIntegerField(default=1)),
                ("repeat", models.PositiveSmallIntegerField(default=1)),
                ("memory_method", models.CharField(max_length=32)),
                ("config", models.JSONField(
                    default=dict,
                    encoder=django.core.serializers.json.DjangoJSONEncoder)),
            ],
            options={"ordering": ["-created", "-pk"]},
        ),
        migrations.CreateModel(
            name="PhaseTiming",
            fields=[
                ("id", models.BigAutoField(auto_created=True, primary_key=True,
                                           serialize=False, verbose_name="ID")),
                ("pipeline", models.CharField(
                    choices=[("classical", "Classical"),
                             ("quantum", "Quantum")],
                    max_length=16)),
                ("phase", models.CharField(
                    choices=[("state-preparation", "State Preparation"),
                             ("coefficient-calculation",
                              "Coefficient Calculation"),
                             ("correction-and-eigenvalue-division",
                              "Correction and Eigenvalue Division"),
                             ("solution-reconstruction",
                              "Solution Reconstruction"),
                             ("initialization", "Initialization"),
                             ("final-phase", "Final Phase")],
                    max_length=48)),
                ("seconds", models.FloatField()),
                ("bytes", models.BigIntegerField()),
                ("run", models.ForeignKey(
                    on_delete=django.db.models.deletion.CASCADE,
                    related_name="timings", to="poisson.benchrun")),
            ],
            options={"ordering": ["pk"]},
        ),
    ]
