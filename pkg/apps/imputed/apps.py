from django.apps import AppConfig


class ImputedConfig(AppConfig):
    name = 'imputed'
