from django.apps import AppConfig


class PoissonConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "poisson"
    verbose_name = "Poisson benchmarks"
