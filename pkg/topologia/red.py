"""
Modelo de red para la simulación de codificación en reversa

Este archivo contiene los tipos y operaciones estructurales del simulador:
- Node, Link, Network: grafo dirigido con costo de transmisión por enlace
- Flow, PhysicalPath: demandas origen-destino y sus caminos físicos
- HyperLink, HyperPath: puntos de codificación y caminos anotados
- ScenarioConfig, ScenarioParams, HyperLinkDecl: escenario tal como se lee
- Scenario: vista indexada (numpy) que consumen costos y dinámica
- validate, path_base_cost, detect_hyperlinks, build_hyperpaths, resolve
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import asdict, dataclass, field, replace
from functools import cached_property

import numpy as np

logger = logging.getLogger(__name__)

AUTO = 'auto'


class StructuralError(ValueError):
    """Referencia o estructura imposible de resolver en la red."""


class InvalidScenarioError(ValueError):
    """Escenario con violaciones estructurales; las lleva en `violations`."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__('; '.join(self.violations))


@dataclass(frozen=True)
class Node:
    id: str


@dataclass(frozen=True)
class Link:
    source: str
    target: str
    cost: float


@dataclass(frozen=True)
class Network:
    """
    Grafo de nodos y enlaces inalámbricos con costo por unidad de tasa.
    Si `symmetric` es verdadero cada enlace declarado implica el inverso
    con el mismo costo.
    """
    nodes: tuple[Node, ...]
    links: tuple[Link, ...]
    symmetric: bool = False

    @cached_property
    def node_ids(self) -> frozenset:
        return frozenset(n.id for n in self.nodes)

    @cached_property
    def costos(self) -> dict[tuple[str, str], float]:
        """Mapa materializado (origen, destino) -> costo."""
        mapa = {}
        for enlace in self.links:
            mapa[(enlace.source, enlace.target)] = enlace.cost
        if self.symmetric:
            for enlace in self.links:
                mapa.setdefault((enlace.target, enlace.source), enlace.cost)
        return mapa

    def has_link(self, a: str, b: str) -> bool:
        return (a, b) in self.costos

    def cost(self, a: str, b: str) -> float:
        try:
            return self.costos[(a, b)]
        except KeyError:
            raise StructuralError(f'missing link {a}->{b}') from None


@dataclass(frozen=True)
class PhysicalPath:
    node_sequence: tuple[str, ...]
    base_cost: float = 0.0

    @property
    def interior(self) -> tuple[str, ...]:
        return self.node_sequence[1:-1]


@dataclass(frozen=True)
class Flow:
    id: int
    source: str
    dest: str
    load: float
    paths: tuple[PhysicalPath, ...]


@dataclass(frozen=True)
class HyperSide:
    """Un lado de un hiper-enlace: (flujo, camino, siguiente salto, costo)."""
    flow: int
    path: int
    next_hop: str
    alpha: float

    @property
    def pair(self) -> tuple[int, int]:
        return (self.flow, self.path)


@dataclass(frozen=True)
class HyperLink:
    id: int
    coding_node: str
    side_a: HyperSide
    side_b: HyperSide

    @property
    def alpha_max(self) -> float:
        return max(self.side_a.alpha, self.side_b.alpha)

    @property
    def alpha_min(self) -> float:
        return min(self.side_a.alpha, self.side_b.alpha)

    @property
    def label(self) -> str:
        return (f'{self.coding_node}[({self.side_a.flow},{self.side_a.path},{self.side_a.next_hop}),'
                f'({self.side_b.flow},{self.side_b.path},{self.side_b.next_hop})]')


@dataclass(frozen=True)
class HyperPath:
    flow: int
    path: int
    physical: PhysicalPath
    hyperlinks: tuple[int, ...] = ()


@dataclass(frozen=True)
class HyperLinkDecl:
    """Hiper-enlace declarado explícitamente en un escenario."""
    node: str
    side_a: tuple[int, int]
    side_b: tuple[int, int]


@dataclass(frozen=True)
class ScenarioParams:
    """Parámetros declarados en el escenario; None significa 'no declarado'."""
    r: float | None = None
    kappa: float | None = None
    eta: float | None = None
    step: float | None = None
    n_small: int | None = None
    n_large: int | None = None

    def declarados(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


@dataclass(frozen=True)
class ScenarioConfig:
    network: Network
    flows: tuple[Flow, ...]
    hyperlinks: str | tuple[HyperLinkDecl, ...] = AUTO
    params: ScenarioParams = field(default_factory=ScenarioParams)


def _sin_duplicados(violaciones):
    vistas = set()
    resultado = []
    for v in violaciones:
        if v not in vistas:
            vistas.add(v)
            resultado.append(v)
    return resultado


def _sucesor_predecesor(secuencia, nodo):
    """Predecesor y sucesor de `nodo` en la secuencia (None en los extremos)."""
    if nodo not in secuencia:
        return None, None
    k = secuencia.index(nodo)
    pred = secuencia[k - 1] if k > 0 else None
    succ = secuencia[k + 1] if k + 1 < len(secuencia) else None
    return pred, succ


def _violaciones_red(net: Network):
    violaciones = []
    vistos = set()
    for nodo in net.nodes:
        if nodo.id in vistos:
            violaciones.append(f'duplicate node {nodo.id}')
        vistos.add(nodo.id)

    pares = {}
    for enlace in net.links:
        for extremo in (enlace.source, enlace.target):
            if extremo not in net.node_ids:
                violaciones.append(f'unknown node {extremo}')
        if enlace.cost < 0:
            violaciones.append('negative link cost')
        if enlace.source == enlace.target:
            violaciones.append(f'self-loop link at {enlace.source}')
        par = (enlace.source, enlace.target)
        if par in pares:
            violaciones.append(f'duplicate link {enlace.source}->{enlace.target}')
        pares[par] = enlace.cost

    if net.symmetric:
        for (a, b), costo in pares.items():
            inverso = pares.get((b, a))
            if inverso is not None and inverso != costo:
                violaciones.append(f'asymmetric cost on link {a}-{b}')
    return violaciones


def _violaciones_flujos(net: Network, flows):
    violaciones = []
    ids = set()
    for flujo in flows:
        if flujo.id in ids:
            violaciones.append(f'duplicate flow {flujo.id}')
        ids.add(flujo.id)
        if not flujo.load > 0:
            violaciones.append(f'non-positive load for flow {flujo.id}')
        for extremo in (flujo.source, flujo.dest):
            if extremo not in net.node_ids:
                violaciones.append(f'unknown node {extremo}')
        if not flujo.paths:
            violaciones.append(f'flow {flujo.id} has no paths')

        for p, camino in enumerate(flujo.paths, start=1):
            secuencia = camino.node_sequence
            desconocidos = [n for n in secuencia if n not in net.node_ids]
            if desconocidos:
                violaciones.extend(f'unknown node {n}' for n in desconocidos)
                continue
            if not secuencia:
                violaciones.append(f'path {flujo.id}.{p} is empty')
                continue
            if secuencia[0] != flujo.source:
                violaciones.append(f'path {flujo.id}.{p} does not start at source {flujo.source}')
            if secuencia[-1] != flujo.dest:
                violaciones.append(f'path {flujo.id}.{p} does not end at destination {flujo.dest}')
            if len(set(secuencia)) != len(secuencia):
                violaciones.append(f'path {flujo.id}.{p} is not simple')
            for a, b in zip(secuencia, secuencia[1:]):
                if not net.has_link(a, b):
                    violaciones.append(f'path {flujo.id}.{p} uses missing link {a}->{b}')
    return violaciones


def _violaciones_hiperenlaces(net: Network, flows, decls):
    violaciones = []
    caminos = {(f.id, p): c for f in flows for p, c in enumerate(f.paths, start=1)}
    vistos = set()
    for decl in decls:
        if decl.node not in net.node_ids:
            violaciones.append(f'unknown node {decl.node}')
            continue
        for flujo, camino in (decl.side_a, decl.side_b):
            fisico = caminos.get((flujo, camino))
            if fisico is None:
                violaciones.append(f'hyper-link at {decl.node} references unknown path {flujo}.{camino}')
            elif decl.node not in fisico.interior:
                violaciones.append(f'hyper-link at {decl.node} is not interior to path {flujo}.{camino}')
        if decl.side_a == decl.side_b:
            violaciones.append(f'hyper-link at {decl.node} pairs path {decl.side_a[0]}.{decl.side_a[1]} with itself')
        elif decl.side_a[0] == decl.side_b[0]:
            violaciones.append(f'hyper-link at {decl.node} pairs flow {decl.side_a[0]} with itself')
        clave = (decl.node, frozenset((decl.side_a, decl.side_b)))
        if clave in vistos:
            violaciones.append(f'duplicate hyper-link at {decl.node}')
        vistos.add(clave)
    return violaciones


def _violaciones_conflictos(hyperlinks):
    """Dos hiper-enlaces sobre el mismo (flujo, camino) en el mismo nodo."""
    ocupados = set()
    violaciones = []
    for h in hyperlinks:
        for lado in (h.side_a, h.side_b):
            clave = (lado.flow, lado.path, h.coding_node)
            if clave in ocupados:
                violaciones.append(f'conflicting hyper-links at node {h.coding_node}')
            ocupados.add(clave)
    return violaciones


def validate(config: ScenarioConfig) -> list[str]:
    """
    Devuelve todas las violaciones estructurales del escenario.
    Lista vacía si y solo si todos los invariantes se cumplen.
    """
    violaciones = _violaciones_red(config.network)
    violaciones += _violaciones_flujos(config.network, config.flows)

    explicitos = config.hyperlinks != AUTO
    if explicitos:
        violaciones += _violaciones_hiperenlaces(config.network, config.flows, config.hyperlinks)

    if not violaciones:
        if explicitos:
            hiper = resolve_hyperlinks(config.network, config.flows, config.hyperlinks)
        else:
            hiper = detect_hyperlinks(config.network, config.flows)
        violaciones += _violaciones_conflictos(hiper)

    violaciones = _sin_duplicados(violaciones)
    if violaciones:
        logger.warning('Escenario con %d violaciones estructurales', len(violaciones))
    return violaciones


def path_base_cost(path: PhysicalPath, net: Network) -> float:
    """Suma de los costos de enlace a lo largo del camino (0 para un solo nodo)."""
    secuencia = path.node_sequence
    return float(sum(net.cost(a, b) for a, b in zip(secuencia, secuencia[1:])))


def _numerar(candidatos, net: Network):
    """Asigna ids deterministas a pares (nodo, (i,p), (j,q)) ya ordenados."""
    hiper = []
    for k, (nodo, par_a, succ_a, par_b, succ_b) in enumerate(sorted(candidatos), start=1):
        hiper.append(HyperLink(
            id=k,
            coding_node=nodo,
            side_a=HyperSide(par_a[0], par_a[1], succ_a, net.cost(nodo, succ_a)),
            side_b=HyperSide(par_b[0], par_b[1], succ_b, net.cost(nodo, succ_b)),
        ))
    return hiper


def detect_hyperlinks(net: Network, flows) -> list[HyperLink]:
    """
    Enumera las oportunidades de codificación en reversa: un nodo interior a
    dos caminos de flujos distintos que recorren en sentidos opuestos los dos
    enlaces adyacentes. Cada par no ordenado produce un único hiper-enlace.
    """
    por_clave = defaultdict(list)
    for flujo in flows:
        for p, camino in enumerate(flujo.paths, start=1):
            secuencia = camino.node_sequence
            for k in range(1, len(secuencia) - 1):
                por_clave[(secuencia[k], secuencia[k - 1], secuencia[k + 1])].append((flujo.id, p))

    candidatos = set()
    for (nodo, pred, succ), pares in por_clave.items():
        opuestos = por_clave.get((nodo, succ, pred), ())
        for par in pares:
            for otro in opuestos:
                if par[0] == otro[0]:
                    continue
                (a, succ_a), (b, succ_b) = sorted(((par, succ), (otro, pred)))
                candidatos.add((nodo, a, succ_a, b, succ_b))
    return _numerar(candidatos, net)


def resolve_hyperlinks(net: Network, flows, decls) -> list[HyperLink]:
    """Resuelve hiper-enlaces declarados: siguiente salto y costo de cada lado."""
    caminos = {(f.id, p): c.node_sequence for f in flows for p, c in enumerate(f.paths, start=1)}
    candidatos = set()
    for decl in decls:
        lados = []
        for par in (tuple(decl.side_a), tuple(decl.side_b)):
            secuencia = caminos.get(par)
            if secuencia is None:
                raise StructuralError(f'hyper-link at {decl.node} references unknown path {par[0]}.{par[1]}')
            pred, succ = _sucesor_predecesor(secuencia, decl.node)
            if pred is None or succ is None:
                raise StructuralError(f'hyper-link at {decl.node} is not interior to path {par[0]}.{par[1]}')
            lados.append((par, succ))
        (a, succ_a), (b, succ_b) = sorted(lados)
        candidatos.add((decl.node, a, succ_a, b, succ_b))
    return _numerar(candidatos, net)


def build_hyperpaths(flows, hyperlinks) -> list[HyperPath]:
    """Un hiper-camino por par (flujo, camino) con los hiper-enlaces que lo tocan."""
    por_par = defaultdict(list)
    for h in hyperlinks:
        for lado in (h.side_a, h.side_b):
            por_par[lado.pair].append(h)

    hipercaminos = []
    for flujo in flows:
        for p, camino in enumerate(flujo.paths, start=1):
            tocan = por_par.get((flujo.id, p), [])
            nodos = [h.coding_node for h in tocan]
            for nodo in nodos:
                if nodos.count(nodo) > 1:
                    raise StructuralError(f'conflicting hyper-links at node {nodo}')
            hipercaminos.append(HyperPath(
                flow=flujo.id,
                path=p,
                physical=camino,
                hyperlinks=tuple(sorted(h.id for h in tocan)),
            ))
    return hipercaminos


@dataclass(frozen=True, eq=False)
class Scenario:
    """
    Escenario resuelto e indexado. Las divisiones X se representan como un
    vector plano en orden (flujo, camino); las capacidades Y en orden de id.
    """
    config: ScenarioConfig
    network: Network
    flows: tuple[Flow, ...]
    hyperlinks: tuple[HyperLink, ...]
    hyperpaths: tuple[HyperPath, ...]

    @cached_property
    def beta(self) -> np.ndarray:
        return np.array([c.base_cost for f in self.flows for c in f.paths], dtype=float)

    @cached_property
    def loads(self) -> np.ndarray:
        return np.array([f.load for f in self.flows], dtype=float)

    @cached_property
    def starts(self) -> np.ndarray:
        tamanos = [len(f.paths) for f in self.flows]
        return np.concatenate(([0], np.cumsum(tamanos)[:-1])).astype(np.intp)

    @cached_property
    def flow_of_var(self) -> np.ndarray:
        return np.repeat(np.arange(len(self.flows)), [len(f.paths) for f in self.flows]).astype(np.intp)

    @cached_property
    def var_labels(self) -> list[str]:
        return [f'x_{f.id}_{p}' for f in self.flows for p in range(1, len(f.paths) + 1)]

    @cached_property
    def capacity_labels(self) -> list[str]:
        return [f'y_{h.id}' for h in self.hyperlinks]

    @cached_property
    def _indice(self) -> dict[tuple[int, int], int]:
        return {(f.id, p): k for k, (f, p) in enumerate(
            (f, p) for f in self.flows for p in range(1, len(f.paths) + 1))}

    def var_index(self, flow: int, path: int) -> int:
        try:
            return self._indice[(flow, path)]
        except KeyError:
            raise StructuralError(f'unknown path {flow}.{path}') from None

    def flow_slice(self, flow: int) -> slice:
        k = self.flow_position(flow)
        inicio = int(self.starts[k])
        return slice(inicio, inicio + len(self.flows[k].paths))

    def flow_position(self, flow: int) -> int:
        for k, f in enumerate(self.flows):
            if f.id == flow:
                return k
        raise StructuralError(f'unknown flow {flow}')

    @cached_property
    def side_a(self) -> np.ndarray:
        return np.array([self.var_index(*h.side_a.pair) for h in self.hyperlinks], dtype=np.intp)

    @cached_property
    def side_b(self) -> np.ndarray:
        return np.array([self.var_index(*h.side_b.pair) for h in self.hyperlinks], dtype=np.intp)

    @cached_property
    def alpha_a(self) -> np.ndarray:
        return np.array([h.side_a.alpha for h in self.hyperlinks], dtype=float)

    @cached_property
    def alpha_b(self) -> np.ndarray:
        return np.array([h.side_b.alpha for h in self.hyperlinks], dtype=float)

    @cached_property
    def alpha_max(self) -> np.ndarray:
        return np.maximum(self.alpha_a, self.alpha_b)

    @cached_property
    def alpha_min(self) -> np.ndarray:
        return np.minimum(self.alpha_a, self.alpha_b)

    @property
    def n_vars(self) -> int:
        return int(self.beta.size)

    @property
    def n_hyperlinks(self) -> int:
        return len(self.hyperlinks)

    def uniform_split(self) -> np.ndarray:
        tamanos = np.array([len(f.paths) for f in self.flows], dtype=float)
        return (self.loads / tamanos)[self.flow_of_var]

    def flow_sums(self, x: np.ndarray) -> np.ndarray:
        return np.add.reduceat(x, self.starts) if x.size else np.zeros(0)


def build_scenario(network: Network, flows, hyperlinks, config: ScenarioConfig | None = None) -> Scenario:
    """Arma un Scenario a partir de piezas ya resueltas (usado por pruebas y generadores)."""
    flujos = tuple(sorted(
        (replace(f, paths=tuple(replace(c, base_cost=path_base_cost(c, network)) for c in f.paths))
         for f in flows),
        key=lambda f: f.id,
    ))
    hiper = tuple(hyperlinks)
    for h in hiper:
        for lado in (h.side_a, h.side_b):
            assert lado.alpha == network.cost(h.coding_node, lado.next_hop)
    hipercaminos = tuple(build_hyperpaths(flujos, hiper))
    if config is None:
        config = ScenarioConfig(network=network, flows=tuple(flows))
    return Scenario(config=config, network=network, flows=flujos,
                    hyperlinks=hiper, hyperpaths=hipercaminos)


def resolve(config: ScenarioConfig) -> Scenario:
    """Valida el escenario y construye su vista indexada."""
    violaciones = validate(config)
    if violaciones:
        raise InvalidScenarioError(violaciones)
    if config.hyperlinks == AUTO:
        hiper = detect_hyperlinks(config.network, config.flows)
    else:
        hiper = resolve_hyperlinks(config.network, config.flows, config.hyperlinks)
    escenario = build_scenario(config.network, config.flows, hiper, config)
    logger.debug('Escenario resuelto: %d flujos, %d caminos, %d hiper-enlaces',
                 len(escenario.flows), escenario.n_vars, escenario.n_hyperlinks)
    return escenario

