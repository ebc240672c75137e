"""
Comando run: simula un sistema y escribe trayectoria y resumen
"""

import logging

from django.core.management.base import BaseCommand, CommandError

from simulaciones.ejecucion import (
    EXITO, SIN_CONVERGENCIA, build_run_config, ejecutar_run, obtener_escenario,
    traducir_errores, validar_opciones,
)

from ._opciones import agregar_opciones_corrida, opciones_corrida

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = 'Corre dd, cd, nocoding, oracle o all sobre un escenario (3 si no converge)'

    def add_arguments(self, parser):
        agregar_opciones_corrida(parser, metodo=True)
        parser.add_argument('--initial-state', dest='initial_state',
                            help='JSON con X e Y iniciales ({"x": {...}, "y": {...}})')

    def handle(self, *args, **options):
        with traducir_errores():
            datos = validar_opciones(opciones_corrida(options))
            config = obtener_escenario(datos)
            run_config = build_run_config(datos, config.params)
            logger.info('Iniciando corrida %s en %s', run_config.method, run_config.out)
            resultados = ejecutar_run(run_config, config)

        for resultado in resultados:
            estilo = self.style.SUCCESS if resultado.exit_code == EXITO else self.style.WARNING
            self.stdout.write(estilo(
                f'{resultado.method}: costo exacto {resultado.cost_exact:.6f}, '
                f'brecha Wardrop {resultado.wardrop_gap:.4g}'
            ))
            for ruta in resultado.files:
                self.stdout.write(f'  {ruta}')

        sin_converger = [r.method for r in resultados if r.exit_code != EXITO]
        if sin_converger:
            raise CommandError(f'Sin convergencia: {", ".join(sin_converger)} (brecha > {run_config.tol})',
                               returncode=SIN_CONVERGENCIA)
