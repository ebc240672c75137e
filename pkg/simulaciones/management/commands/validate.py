"""
Comando validate: revisa un archivo de escenario y lista sus violaciones
"""

from django.core.management.base import BaseCommand, CommandError

from simulaciones.ejecucion import ERROR_FORMATO, ESCENARIO_INVALIDO
from topologia.escenarios import ScenarioParseError, load_scenario
from topologia.red import AUTO, detect_hyperlinks, resolve_hyperlinks, validate


class Command(BaseCommand):
    help = 'Valida un escenario (0 válido, 1 violaciones estructurales, 2 error de formato)'

    def add_arguments(self, parser):
        parser.add_argument('path', help='Archivo JSON del escenario')

    def handle(self, *args, **options):
        try:
            config = load_scenario(options['path'])
        except ScenarioParseError as exc:
            raise CommandError(f'Error de formato: {exc}', returncode=ERROR_FORMATO)

        violaciones = validate(config)
        if violaciones:
            for v in violaciones:
                self.stderr.write(f'  - {v}')
            raise CommandError(f'Escenario inválido: {len(violaciones)} violaciones',
                               returncode=ESCENARIO_INVALIDO)

        if config.hyperlinks == AUTO:
            hiper = detect_hyperlinks(config.network, config.flows)
        else:
            hiper = resolve_hyperlinks(config.network, config.flows, config.hyperlinks)
        caminos = sum(len(f.paths) for f in config.flows)
        self.stdout.write(self.style.SUCCESS(
            f'Escenario válido: {len(config.network.nodes)} nodos, {len(config.flows)} flujos, '
            f'{caminos} caminos, {len(hiper)} hiper-enlaces'
        ))
        for h in hiper:
            self.stdout.write(f'  {h.label}')
