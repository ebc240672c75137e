from django.apps import AppConfig


class ReferenciasConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'referencias'
