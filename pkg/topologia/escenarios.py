"""
Lectura y escritura de archivos de escenario (JSON UTF-8)

Este archivo contiene:
- parse_scenario / load_scenario: JSON -> ScenarioConfig, con formularios
  Django para el formato de cada bloque
- serialize_scenario / dump_scenario: ScenarioConfig -> JSON
- scenario_hash: sha256 del escenario canónico
- reference_scenario: escenario de ocho nodos con tres flujos usado como referencia
"""

import hashlib
import json
import logging
from pathlib import Path

from .forms import EnlaceForm, FlujoForm, HiperEnlaceForm, ParametrosForm, primer_error
from .red import (
    AUTO, Flow, HyperLinkDecl, Link, Network, Node, PhysicalPath,
    ScenarioConfig, ScenarioParams,
)

logger = logging.getLogger(__name__)


class ScenarioParseError(ValueError):
    """JSON ilegible, campo ausente o valor numérico mal formado."""


def _validar(form_cls, datos, contexto):
    form = form_cls(data=datos)
    if not form.is_valid():
        raise ScenarioParseError(f'{contexto}: {primer_error(form)}')
    return form.cleaned_data


def _exigir(bloque, clave, contexto):
    if not isinstance(bloque, dict) or clave not in bloque:
        raise ScenarioParseError(f'{contexto}: falta el campo "{clave}"')
    return bloque[clave]


def _lista(valor, contexto):
    if not isinstance(valor, list):
        raise ScenarioParseError(f'{contexto}: se esperaba una lista')
    return valor


def _leer_flujo(bloque, k):
    contexto = f'flows[{k}]'
    datos = _validar(FlujoForm, {
        'id': _exigir(bloque, 'id', contexto),
        'origen': _exigir(bloque, 'src', contexto),
        'destino': _exigir(bloque, 'dst', contexto),
        'carga': _exigir(bloque, 'load', contexto),
    }, contexto)
    caminos = []
    for p, secuencia in enumerate(_lista(_exigir(bloque, 'paths', contexto), contexto), start=1):
        secuencia = _lista(secuencia, f'{contexto}.paths[{p}]')
        caminos.append(PhysicalPath(node_sequence=tuple(str(n) for n in secuencia)))
    return Flow(
        id=datos['id'],
        source=datos['origen'],
        dest=datos['destino'],
        load=datos['carga'],
        paths=tuple(caminos),
    )


def _leer_hiperenlaces(valor):
    if valor == AUTO:
        return AUTO
    declarados = []
    for k, bloque in enumerate(_lista(valor, 'hyperlinks')):
        contexto = f'hyperlinks[{k}]'
        lado_a = _exigir(bloque, 'side_a', contexto)
        lado_b = _exigir(bloque, 'side_b', contexto)
        datos = _validar(HiperEnlaceForm, {
            'nodo': _exigir(bloque, 'node', contexto),
            'flujo_a': _exigir(lado_a, 'flow', contexto),
            'camino_a': _exigir(lado_a, 'path', contexto),
            'flujo_b': _exigir(lado_b, 'flow', contexto),
            'camino_b': _exigir(lado_b, 'path', contexto),
        }, contexto)
        declarados.append(HyperLinkDecl(
            node=datos['nodo'],
            side_a=(datos['flujo_a'], datos['camino_a']),
            side_b=(datos['flujo_b'], datos['camino_b']),
        ))
    return tuple(declarados)


def _leer_parametros(bloque):
    if bloque is None:
        return ScenarioParams()
    if not isinstance(bloque, dict):
        raise ScenarioParseError('params: se esperaba un objeto')
    datos = _validar(ParametrosForm, bloque, 'params')
    return ScenarioParams(**{k: v for k, v in datos.items() if v is not None})


def parse_scenario(texto: str) -> ScenarioConfig:
    """
    Convierte el texto JSON de un escenario en un ScenarioConfig.
    Solo revisa formato; las violaciones estructurales quedan para validate().
    """
    try:
        datos = json.loads(texto)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f'JSON inválido: {exc}') from exc
    if not isinstance(datos, dict):
        raise ScenarioParseError('el escenario debe ser un objeto JSON')

    nodos = tuple(Node(str(n)) for n in _lista(_exigir(datos, 'nodes', 'escenario'), 'nodes'))

    enlaces = []
    for k, bloque in enumerate(_lista(_exigir(datos, 'links', 'escenario'), 'links')):
        contexto = f'links[{k}]'
        enlace = _validar(EnlaceForm, {
            'origen': _exigir(bloque, 'from', contexto),
            'destino': _exigir(bloque, 'to', contexto),
            'costo': _exigir(bloque, 'cost', contexto),
        }, contexto)
        enlaces.append(Link(enlace['origen'], enlace['destino'], enlace['costo']))

    simetrica = datos.get('symmetric', False)
    if not isinstance(simetrica, bool):
        raise ScenarioParseError('symmetric: se esperaba true o false')

    flujos = tuple(_leer_flujo(bloque, k)
                   for k, bloque in enumerate(_lista(_exigir(datos, 'flows', 'escenario'), 'flows')))

    return ScenarioConfig(
        network=Network(nodes=nodos, links=tuple(enlaces), symmetric=simetrica),
        flows=flujos,
        hyperlinks=_leer_hiperenlaces(datos.get('hyperlinks', AUTO)),
        params=_leer_parametros(datos.get('params')),
    )


def load_scenario(ruta) -> ScenarioConfig:
    ruta = Path(ruta)
    try:
        texto = ruta.read_text(encoding='utf-8')
    except (OSError, UnicodeDecodeError) as exc:
        raise ScenarioParseError(f'no se pudo leer {ruta}: {exc}') from exc
    logger.debug('Leyendo escenario %s', ruta)
    return parse_scenario(texto)


def serialize_scenario(config: ScenarioConfig) -> dict:
    """Forma JSON del escenario; los enlaces se escriben tal como se declararon."""
    datos = {
        'nodes': [n.id for n in config.network.nodes],
        'links': [{'from': e.source, 'to': e.target, 'cost': e.cost} for e in config.network.links],
        'symmetric': config.network.symmetric,
        'flows': [
            {
                'id': f.id,
                'src': f.source,
                'dst': f.dest,
                'load': f.load,
                'paths': [list(c.node_sequence) for c in f.paths],
            }
            for f in config.flows
        ],
    }
    if config.hyperlinks == AUTO:
        datos['hyperlinks'] = AUTO
    else:
        datos['hyperlinks'] = [
            {
                'node': d.node,
                'side_a': {'flow': d.side_a[0], 'path': d.side_a[1]},
                'side_b': {'flow': d.side_b[0], 'path': d.side_b[1]},
            }
            for d in config.hyperlinks
        ]
    parametros = config.params.declarados()
    if parametros:
        datos['params'] = parametros
    return datos


def dump_scenario(config: ScenarioConfig, ruta=None) -> str:
    texto = json.dumps(serialize_scenario(config), indent=2, ensure_ascii=False)
    if ruta is not None:
        Path(ruta).write_text(texto + '\n', encoding='utf-8')
    return texto


def scenario_hash(config: ScenarioConfig) -> str:
    canonico = json.dumps(serialize_scenario(config), sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonico.encode('utf-8')).hexdigest()


# Costos simétricos de enlace del escenario de referencia
COSTOS_REFERENCIA = (
    ('n1', 'n2', 2.8),
    ('n2', 'n3', 1.6),
    ('n3', 'n4', 1.8),
    ('n2', 'n5', 1.3),
    ('n5', 'n4', 2.1),
    ('n2', 'n6', 1.7),
    ('n4', 'n8', 2.9),
    ('n8', 'n6', 2.2),
    ('n5', 'n7', 1.9),
    ('n7', 'n1', 2.6),
)

FLUJOS_REFERENCIA = (
    (1, 'n1', 'n4', 4.73, (('n1', 'n2', 'n3', 'n4'), ('n1', 'n2', 'n5', 'n4'))),
    (2, 'n4', 'n6', 2.69, (('n4', 'n3', 'n2', 'n6'), ('n4', 'n8', 'n6'))),
    (3, 'n5', 'n1', 3.56, (('n5', 'n7', 'n1'), ('n5', 'n2', 'n1'))),
)


def reference_scenario() -> ScenarioConfig:
    """
    Escenario de referencia: ocho nodos, diez enlaces simétricos, tres flujos
    con dos caminos cada uno y r = -100 con el calendario 50 x 20.
    """
    return ScenarioConfig(
        network=Network(
            nodes=tuple(Node(f'n{k}') for k in range(1, 9)),
            links=tuple(Link(a, b, c) for a, b, c in COSTOS_REFERENCIA),
            symmetric=True,
        ),
        flows=tuple(
            Flow(id=i, source=s, dest=d, load=carga,
                 paths=tuple(PhysicalPath(node_sequence=c) for c in caminos))
            for i, s, d, carga, caminos in FLUJOS_REFERENCIA
        ),
        hyperlinks=AUTO,
        params=ScenarioParams(r=-100.0, kappa=0.5, eta=0.05, step=1.0, n_small=20, n_large=50),
    )
