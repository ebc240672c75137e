"""
Generador de escenarios aleatorios reproducibles

Este archivo contiene generate_random_scenario, que arma topologías de
mundo pequeño con networkx para las corridas de comparación a escala.
"""

import logging
from itertools import islice

import networkx as nx
import numpy as np

from .red import (
    Flow, HyperLinkDecl, Link, Network, Node, PhysicalPath,
    ScenarioConfig, ScenarioParams, detect_hyperlinks,
)

logger = logging.getLogger(__name__)


def _filtrar_conflictos(hiperenlaces):
    """Conserva, en orden de id, los hiper-enlaces que no chocan con uno ya elegido."""
    ocupados = set()
    elegidos = []
    for h in hiperenlaces:
        claves = {(h.side_a.flow, h.side_a.path, h.coding_node),
                  (h.side_b.flow, h.side_b.path, h.coding_node)}
        if claves & ocupados:
            continue
        ocupados |= claves
        elegidos.append(HyperLinkDecl(node=h.coding_node, side_a=h.side_a.pair, side_b=h.side_b.pair))
    return tuple(elegidos)


def _elegir_extremos(grafo, rng, intentos=200):
    """Par origen-destino separado por al menos dos saltos."""
    nodos = list(grafo.nodes)
    for _ in range(intentos):
        s, d = rng.choice(len(nodos), size=2, replace=False)
        s, d = nodos[s], nodos[d]
        if nx.shortest_path_length(grafo, s, d) >= 2:
            return s, d
    raise ValueError('no hay pares de nodos a dos o más saltos en la topología generada')


def generate_random_scenario(seed: int, n_nodes: int = 30, n_flows: int = 6,
                             paths: tuple[int, int] = (2, 3), vecinos: int = 4,
                             reconexion: float = 0.3) -> ScenarioConfig:
    """
    Escenario aleatorio con semilla:
    - grafo Watts-Strogatz conexo, costos simétricos uniformes en [1, 3]
    - flujos en pares opuestos (el segundo recorre los caminos del primero al revés)
    - entre paths[0] y paths[1] caminos simples más cortos por flujo
    - hiper-enlaces explícitos, sin conflictos por nodo
    """
    rng = np.random.default_rng(seed)
    base = nx.connected_watts_strogatz_graph(n_nodes, k=vecinos, p=reconexion, seed=seed)
    grafo = nx.relabel_nodes(base, {k: f'n{k + 1}' for k in base.nodes})
    for a, b in sorted(grafo.edges):
        grafo[a][b]['cost'] = round(float(rng.uniform(1.0, 3.0)), 2)

    flujos = []
    siguiente_id = 1
    while len(flujos) < n_flows:
        s, d = _elegir_extremos(grafo, rng)
        cantidad = int(rng.integers(paths[0], paths[1] + 1))
        caminos = tuple(islice(nx.shortest_simple_paths(grafo, s, d, weight='cost'), cantidad))
        carga = round(float(rng.uniform(1.0, 5.0)), 2)
        flujos.append(Flow(
            id=siguiente_id, source=s, dest=d, load=carga,
            paths=tuple(PhysicalPath(tuple(c)) for c in caminos),
        ))
        siguiente_id += 1
        if len(flujos) < n_flows:
            carga = round(float(rng.uniform(1.0, 5.0)), 2)
            flujos.append(Flow(
                id=siguiente_id, source=d, dest=s, load=carga,
                paths=tuple(PhysicalPath(tuple(reversed(c))) for c in caminos),
            ))
            siguiente_id += 1

    red = Network(
        nodes=tuple(Node(n) for n in grafo.nodes),
        links=tuple(Link(a, b, grafo[a][b]['cost']) for a, b in sorted(grafo.edges)),
        symmetric=True,
    )
    hiperenlaces = _filtrar_conflictos(detect_hyperlinks(red, flujos))
    logger.info('Escenario aleatorio (semilla %s): %d nodos, %d flujos, %d hiper-enlaces',
                seed, n_nodes, len(flujos), len(hiperenlaces))
    return ScenarioConfig(network=red, flows=tuple(flujos), hyperlinks=hiperenlaces,
                          params=ScenarioParams())
