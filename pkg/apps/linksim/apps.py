from django.apps import AppConfig


class LinksimConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.linksim'
    verbose_name = 'Link Simulation'
