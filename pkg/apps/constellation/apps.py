from django.apps import AppConfig


class ConstellationConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.constellation'
    verbose_name = 'Constellation'
