from django.apps import AppConfig


class SolversConfig(AppConfig):
    name = "solvers"
