from django.apps import AppConfig


class ProtoptConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.protopt'
    verbose_name = 'Protograph Optimization'
