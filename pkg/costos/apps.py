from django.apps import AppConfig


class CostosConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'costos'
