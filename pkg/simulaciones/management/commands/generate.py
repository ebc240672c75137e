"""
Comando generate: escribe el escenario de referencia o uno aleatorio
"""

from django.core.management.base import BaseCommand, CommandError

from simulaciones.ejecucion import ERROR_FORMATO
from topologia.escenarios import dump_scenario, reference_scenario
from topologia.generador import generate_random_scenario


class Command(BaseCommand):
    help = 'Genera un escenario JSON (--reference o --seed)'

    def add_arguments(self, parser):
        grupo = parser.add_mutually_exclusive_group(required=True)
        grupo.add_argument('--reference', action='store_true', help='Escenario de referencia de ocho nodos')
        grupo.add_argument('--seed', type=int, help='Semilla del generador aleatorio')
        parser.add_argument('--nodes', type=int, default=30, help='Nodos del grafo aleatorio')
        parser.add_argument('--flows', type=int, default=6, help='Flujos del escenario aleatorio (par)')
        parser.add_argument('--out', help='Archivo de destino (por defecto, salida estándar)')

    def handle(self, *args, **options):
        if options['reference']:
            config = reference_scenario()
        else:
            if options['nodes'] < 4 or options['flows'] < 2:
                raise CommandError('Se requieren al menos 4 nodos y 2 flujos', returncode=ERROR_FORMATO)
            config = generate_random_scenario(options['seed'], n_nodes=options['nodes'], n_flows=options['flows'])

        texto = dump_scenario(config, options['out'])
        if options['out']:
            self.stdout.write(self.style.SUCCESS(f'Escenario escrito en {options["out"]}'))
        else:
            self.stdout.write(texto)
