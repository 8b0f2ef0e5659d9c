"""Collection wiring so pytest runs the suite the way `manage.py test` does."""
import os

import django


def pytest_configure(config):
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "qpsite.settings")
    django.setup()
    from django.test.utils import setup_databases, setup_test_environment
    setup_test_environment()
    config._qpoisson_db = setup_databases(verbosity=0, interactive=False)


def pytest_unconfigure(config):
    from django.test.utils import teardown_databases, teardown_test_environment
    old_config = getattr(config, "_qpoisson_db", None)
    if old_config is not None:
        teardown_databases(old_config, verbosity=0)
        teardown_test_environment()
