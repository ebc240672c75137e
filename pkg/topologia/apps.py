from django.apps import AppConfig


class TopologiaConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'topologia'
