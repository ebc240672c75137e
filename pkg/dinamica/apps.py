from django.apps import AppConfig


class DinamicaConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'dinamica'
