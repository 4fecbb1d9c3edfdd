from django.apps import AppConfig


class OrderingsConfig(AppConfig):
    name = "orderings"
