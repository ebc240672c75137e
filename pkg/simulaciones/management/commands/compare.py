"""
Comando compare: oráculo, DD, CD y sin codificación sobre un escenario
"""

from django.core.management.base import BaseCommand, CommandError

from simulaciones.ejecucion import (
    SIN_CONVERGENCIA, build_run_config, ejecutar_comparacion, obtener_escenario,
    traducir_errores, validar_opciones,
)

from ._opciones import agregar_opciones_corrida, opciones_corrida


class Command(BaseCommand):
    help = 'Compara los cuatro sistemas y revisa el orden de costos (3 si el orden falla)'

    def add_arguments(self, parser):
        agregar_opciones_corrida(parser)

    def handle(self, *args, **options):
        with traducir_errores():
            datos = validar_opciones(opciones_corrida(options))
            config = obtener_escenario(datos)
            run_config = build_run_config(datos, config.params)
            informe, archivos, duracion = ejecutar_comparacion(run_config, config)

        self.stdout.write(f'{"método":<10} {"costo exacto":>14} {"vs óptimo":>10} {"tiempo (s)":>11}')
        for metodo, fila in informe.rows.items():
            self.stdout.write(
                f'{metodo:<10} {fila.cost_exact:>14.6f} {informe.gap_to_oracle(metodo):>10.4%} {fila.runtime:>11.3f}'
            )
        self.stdout.write(f'DD - CD = {informe.dd_minus_cd:.6f}; tiempo total {duracion:.3f} s')
        for ruta in archivos:
            self.stdout.write(f'  {ruta}')

        fallidos = [c.name for c in informe.checks if not c.passed]
        if fallidos:
            raise CommandError(f'Orden de costos violado: {", ".join(fallidos)}', returncode=SIN_CONVERGENCIA)
        self.stdout.write(self.style.SUCCESS('Orden de costos verificado'))
