from django.apps import AppConfig


class PexitConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.pexit'
    verbose_name = 'P-EXIT Analysis'
