from django.apps import AppConfig


class SimulacionesConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'simulaciones'
