"""
Comando gradcheck: pagos y derivadas de capacidad contra diferencias finitas
"""

from django.core.management.base import BaseCommand, CommandError

from simulaciones.ejecucion import (
    SIN_CONVERGENCIA, build_run_config, chequear_gradientes, obtener_escenario,
    traducir_errores, validar_opciones,
)
from simulaciones.models import Ejecucion
from simulaciones.procedencia import procedencia, version_compilacion
from simulaciones.salidas import escribir_json
from topologia.escenarios import scenario_hash
from topologia.red import resolve

from ._opciones import agregar_opciones_corrida, opciones_corrida

TOLERANCIA_GRADIENTE = 1e-4


class Command(BaseCommand):
    help = 'Chequea gradientes por diferencias finitas (omitido para r < -20)'

    def add_arguments(self, parser):
        agregar_opciones_corrida(parser)
        parser.add_argument('--samples', type=int, default=100, help='Estados aleatorios a revisar')
        parser.add_argument('--h-step', dest='h_step', type=float, default=1e-6, help='Paso de las diferencias')

    def handle(self, *args, **options):
        with traducir_errores():
            datos = validar_opciones(opciones_corrida(options))
            config = obtener_escenario(datos)
            run_config = build_run_config(datos, config.params)
            scenario = resolve(config)
            reporte = chequear_gradientes(scenario, run_config.sp, options['samples'],
                                          seed=run_config.seed or 0, h_step=options['h_step'])

        hash_escenario = scenario_hash(config)
        run_config.out.mkdir(parents=True, exist_ok=True)
        reporte['provenance'] = procedencia(hash_escenario, 'gradcheck', run_config.params_echo())
        ruta = escribir_json(run_config.out / 'gradcheck.json', reporte)

        if reporte['skipped']:
            self.stdout.write(self.style.WARNING(
                f'Chequeo omitido para r = {run_config.sp.r}: diferencias finitas poco fiables'
            ))
            codigo = 0
        else:
            peor = max(reporte['payoff_error'], reporte['capacity_error'])
            codigo = 0 if peor <= TOLERANCIA_GRADIENTE else SIN_CONVERGENCIA
            self.stdout.write(
                f'Error relativo máximo: pagos {reporte["payoff_error"]:.3e}, '
                f'capacidades {reporte["capacity_error"]:.3e}'
            )
        self.stdout.write(f'  {ruta}')
        Ejecucion.registrar(
            metodo='gradcheck', hash_escenario=hash_escenario, parametros=run_config.params_echo(),
            codigo_salida=codigo, directorio_salida=run_config.out, version=version_compilacion(),
        )
        if codigo:
            raise CommandError(f'Gradientes fuera de tolerancia ({TOLERANCIA_GRADIENTE})', returncode=codigo)
