from django.apps import AppConfig


class QcliftConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.qclift'
    verbose_name = 'Quasi-Cyclic Lifting'
