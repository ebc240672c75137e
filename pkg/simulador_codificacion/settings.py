"""
Configuración del Simulador de Codificación en Reversa (reverse carpooling)
Desarrollado con Django 4.2.7

Este archivo contiene todas las configuraciones necesarias para el simulador:
- Configuración de base de datos (registro de ejecuciones)
- Configuración de aplicaciones instaladas
- Parámetros por defecto de la dinámica y del suavizado
- Configuración de logging por aplicación
"""

from pathlib import Path
from decouple import config
import dj_database_url

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Configuración de seguridad
# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = config('SECRET_KEY', default='django-insecure-simulador-codificacion-solo-desarrollo')

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = config('DEBUG', default='True') == 'True'

ALLOWED_HOSTS = config('ALLOWED_HOSTS', default='localhost,127.0.0.1', cast=lambda v: [s.strip() for s in v.split(',')])


# Application definition

INSTALLED_APPS = [
    # Aplicaciones de Django por defecto
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
    'django.contrib.staticfiles',

    # Aplicaciones del proyecto
    'topologia',     # Red, flujos, hiper-enlaces y escenarios
    'costos',        # Costos exactos y suavizados, pagos y gradientes
    'dinamica',      # Dinámica desacoplada de dos escalas de tiempo
    'referencias',   # Sistemas de comparación y oráculo óptimo
    'simulaciones',  # Comandos de línea, salidas y registro de ejecuciones
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'django.contrib.sessions.middleware.SessionMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.middleware.csrf.CsrfViewMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]

ROOT_URLCONF = 'simulador_codificacion.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.debug',
                'django.template.context_processors.request',
                'django.contrib.auth.context_processors.auth',
                'django.contrib.messages.context_processors.messages',
            ],
        },
    },
]

WSGI_APPLICATION = 'simulador_codificacion.wsgi.application'


# Database
# En desarrollo usa SQLite; DATABASE_URL permite apuntar a otro motor

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

if config('DATABASE_URL', default=''):
    DATABASES['default'] = dj_database_url.parse(config('DATABASE_URL'))


# Internationalization

LANGUAGE_CODE = 'es-ec'
TIME_ZONE = 'America/Guayaquil'
USE_I18N = True
USE_TZ = True

STATIC_URL = '/static/'
STATIC_ROOT = BASE_DIR / 'staticfiles'

# Default primary key field type
DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Parámetros por defecto del simulador
# Cada corrida puede sobrescribirlos desde el escenario o desde la línea de comandos
SIMULADOR_R = config('SIMULADOR_R', default=-100.0, cast=float)
SIMULADOR_PISO = config('SIMULADOR_PISO', default=1e-12, cast=float)
SIMULADOR_KAPPA = config('SIMULADOR_KAPPA', default=0.5, cast=float)
SIMULADOR_ETA = config('SIMULADOR_ETA', default=0.05, cast=float)
SIMULADOR_PASO = config('SIMULADOR_PASO', default=1.0, cast=float)
SIMULADOR_PASOS_CORTOS = config('SIMULADOR_PASOS_CORTOS', default=20, cast=int)
SIMULADOR_PASOS_LARGOS = config('SIMULADOR_PASOS_LARGOS', default=50, cast=int)
SIMULADOR_TOLERANCIA = config('SIMULADOR_TOLERANCIA', default=0.05, cast=float)
SIMULADOR_RETROCESO_CAPACIDADES = config('SIMULADOR_RETROCESO_CAPACIDADES', default=True, cast=bool)
SIMULADOR_DIRECTORIO_SALIDA = config('SIMULADOR_DIRECTORIO_SALIDA', default=str(BASE_DIR / 'salidas'))

# Configuración de logging
LOG_LEVEL = config('LOG_LEVEL', default='INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'level': LOG_LEVEL,
        },
    },
    'loggers': {
        'django': {
            'handlers': ['console'],
            'level': 'INFO',
        },
        'topologia': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': True,
        },
        'costos': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': True,
        },
        'dinamica': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': True,
        },
        'referencias': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': True,
        },
        'simulaciones': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': True,
        },
    },
}
