"""WSGI entry point serving the benchmark archive views and admin."""

import os

from django.core.wsgi import get_wsgi_application

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "qpsite.settings")

application = get_wsgi_application()
