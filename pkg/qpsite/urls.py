from django.contrib import admin
from django.http import HttpResponseRedirect
from django.urls import include, path

urlpatterns = [
    path("", lambda request: HttpResponseRedirect('runs/')),
    path("runs/", include("poisson.urls")),
    path("admin/", admin.site.urls),
]
