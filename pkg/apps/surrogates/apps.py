from django.apps import AppConfig


class SurrogatesConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.surrogates'
    verbose_name = 'Surrogate Channels'
