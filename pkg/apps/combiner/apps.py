from django.apps import AppConfig


class CombinerConfig(AppConfig):
    name = 'combiner'
