"""
Procedencia de una corrida: versión del código y marca temporal
"""

import logging
import subprocess
from functools import lru_cache

from django.conf import settings
from django.utils import timezone

logger = logging.getLogger(__name__)

DESCONOCIDA = 'desconocido'


@lru_cache(maxsize=1)
def version_compilacion() -> str:
    """Salida de `git describe`, o 'desconocido' fuera de un repositorio."""
    try:
        salida = subprocess.run(
            ['git', 'describe', '--always', '--dirty', '--tags'],
            cwd=settings.BASE_DIR, capture_output=True, text=True, timeout=5, check=True,
        )
    except (OSError, subprocess.SubprocessError):
        logger.debug('git describe no disponible')
        return DESCONOCIDA
    return salida.stdout.strip() or DESCONOCIDA


def procedencia(hash_escenario: str, metodo: str, parametros: dict) -> dict:
    return {
        'scenario_sha256': hash_escenario,
        'method': metodo,
        'params': parametros,
        'build': version_compilacion(),
        'timestamp': timezone.now().isoformat(),
    }
