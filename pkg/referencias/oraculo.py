"""
Oráculo del óptimo exacto

Este archivo contiene:
- OracleSolution
- solve_optimal: programa lineal equivalente al costo exacto, resuelto con simplex_bland
- pulir_capacidades: elige Y dentro del conjunto de capacidades óptimas
- verify_optimum_grid: verificador por rejilla para instancias pequeñas
- optimality_certificate: mayor descenso por perturbaciones de una coordenada
- smoothed_optimum: mínimo del costo suavizado para varios r
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import product

import numpy as np

from costos.modelo import (
    SmoothingParams, SystemState, exact_total_cost, payoffs, rebate_grads_y,
    smoothed_total_cost,
)
from dinamica.equilibrio import wardrop_report

from .simplex import LinearProgramError, simplex_bland

logger = logging.getLogger(__name__)

MAX_VARIABLES_REJILLA = 6


@dataclass(frozen=True)
class OracleSolution:
    x: np.ndarray
    y: np.ndarray
    cost: float
    iterations: int
    residual: float
    lp_value: float
    polished: bool = False

    @property
    def state(self) -> SystemState:
        return SystemState(self.x, self.y)


def _programa_lineal(scenario):
    """
    Variables [x, y, m_a, m_b, holguras(4 por hiper-enlace)]; cada m acota
    por debajo a su mínimo: m_a <= x_a, m_a <= y, m_b <= x_b, m_b <= y.
    """
    n, nh, nf = scenario.n_vars, scenario.n_hyperlinks, len(scenario.flows)
    total = n + 3 * nh + 4 * nh
    A = np.zeros((nf + 4 * nh, total))
    b = np.zeros(nf + 4 * nh)
    for k in range(nf):
        A[k, np.flatnonzero(scenario.flow_of_var == k)] = 1.0
        b[k] = scenario.loads[k]

    iy, ima, imb, ihol = n, n + nh, n + 2 * nh, n + 3 * nh
    for h in range(nh):
        filas = nf + 4 * h + np.arange(4)
        pares = ((ima + h, int(scenario.side_a[h])), (ima + h, iy + h),
                 (imb + h, int(scenario.side_b[h])), (imb + h, iy + h))
        for fila, (m_col, otra) in zip(filas, pares):
            A[fila, m_col] = 1.0
            A[fila, otra] = -1.0
            A[fila, ihol + (fila - nf)] = 1.0

    c = np.concatenate([
        scenario.beta,
        scenario.alpha_max,
        -scenario.alpha_a,
        -scenario.alpha_b,
        np.zeros(4 * nh),
    ])
    return A, b, c


def _costo_en_y(x_a, x_b, alfa_a, alfa_b, y):
    """Parte del costo exacto que depende de y_h (con X fijo)."""
    return max(alfa_a, alfa_b) * y - alfa_a * min(x_a, y) - alfa_b * min(x_b, y)


def intervalo_optimo(x_a: float, x_b: float, alfa_a: float, alfa_b: float, tol: float = 1e-12) -> tuple[float, float]:
    """
    Conjunto de capacidades que minimizan el costo exacto con X fijo. El costo
    es lineal por tramos con quiebres en {0, x_a, x_b}, así que el conjunto
    es un punto o el segmento entre dos quiebres.
    """
    quiebres = sorted({0.0, float(x_a), float(x_b)})
    valores = [_costo_en_y(x_a, x_b, alfa_a, alfa_b, q) for q in quiebres]
    minimo = min(valores)
    optimos = [q for q, v in zip(quiebres, valores) if v <= minimo + tol * max(1.0, abs(minimo))]
    return optimos[0], optimos[-1]


def _violacion_wardrop(x, y, scenario, sp):
    informe = wardrop_report(x, payoffs(SystemState(x, y), scenario, sp), scenario)
    return max(informe.wardrop_gap, informe.unused_violation)


def pulir_capacidades(x: np.ndarray, y: np.ndarray, scenario, sp: SmoothingParams,
                      puntos: int = 41, rondas: int = 3, barridos: int = 2) -> np.ndarray:
    """
    Mueve cada y_h dentro de su intervalo óptimo exacto para minimizar la
    violación Wardrop de los pagos suavizados; el costo exacto no cambia.
    """
    y = np.array(y, dtype=float)
    intervalos = [
        intervalo_optimo(x[scenario.side_a[h]], x[scenario.side_b[h]], scenario.alpha_a[h], scenario.alpha_b[h])
        for h in range(scenario.n_hyperlinks)
    ]
    for _ in range(barridos):
        for h, (bajo, alto) in enumerate(intervalos):
            if alto - bajo <= 0.0:
                y[h] = bajo
                continue
            centro, radio = y[h], alto - bajo
            for _ in range(rondas):
                candidatos = np.clip(np.linspace(centro - radio, centro + radio, puntos), bajo, alto)
                mejor, mejor_valor = y[h], _violacion_wardrop(x, y, scenario, sp)
                for v in candidatos:
                    prueba = y.copy()
                    prueba[h] = v
                    valor = _violacion_wardrop(x, prueba, scenario, sp)
                    if valor < mejor_valor:
                        mejor, mejor_valor = v, valor
                y[h] = mejor
                centro, radio = mejor, 2.0 * radio / (puntos - 1)
    return y


def solve_optimal(scenario, sp: SmoothingParams = SmoothingParams(), polish: bool = True) -> OracleSolution:
    """
    Minimiza el costo exacto sobre (X, Y) con conservación de masa y no
    negatividad. Con polish, Y se elige dentro del conjunto óptimo para
    que los pagos suavizados queden en equilibrio.
    """
    A, b, c = _programa_lineal(scenario)
    try:
        resultado = simplex_bland(A, b, c)
    except LinearProgramError:
        logger.error('El programa lineal del oráculo no tiene solución')
        raise
    n, nh = scenario.n_vars, scenario.n_hyperlinks
    x = resultado.z[:n].copy()
    sumas = scenario.flow_sums(x)
    escala = np.divide(scenario.loads, sumas, out=np.ones_like(sumas), where=sumas > 0)
    x = x * escala[scenario.flow_of_var]
    y = resultado.z[n:n + nh].copy()
    if polish and nh:
        y = pulir_capacidades(x, y, scenario, sp)
    costo = exact_total_cost(SystemState(x, y), scenario)
    logger.info('Oráculo: costo exacto %.6f en %d iteraciones', costo, resultado.iteraciones)
    return OracleSolution(
        x=x, y=y, cost=costo,
        iterations=resultado.iteraciones,
        residual=resultado.residuo,
        lp_value=resultado.valor,
        polished=polish and bool(nh),
    )


def costo_con_y_optimo(x: np.ndarray, scenario) -> float:
    """Costo exacto con cada y_h en min(x_a, x_b), su valor óptimo para X fijo."""
    ahorro = scenario.alpha_min * np.minimum(x[..., scenario.side_a], x[..., scenario.side_b])
    return x @ scenario.beta - ahorro.sum(axis=-1)


def _rejilla_simplex(carga, caminos, divisiones):
    """Puntos de {x >= 0, suma = carga} con coordenadas múltiplo de carga/divisiones."""
    puntos = [c for c in product(range(divisiones + 1), repeat=caminos - 1) if sum(c) <= divisiones]
    return np.array([list(c) + [divisiones - sum(c)] for c in puntos], dtype=float) * carga / divisiones


def verify_optimum_grid(scenario, divisiones: int = 20, radio_minimo: float = 1e-9, max_rondas: int = 400) -> tuple[float, np.ndarray]:
    """
    Verificador independiente del simplex: rejilla gruesa sobre el producto
    de símplices por flujo y luego búsqueda local en una rejilla producto de
    cinco puntos por dimensión libre, recentrando o reduciendo el radio.
    """
    if scenario.n_vars > MAX_VARIABLES_REJILLA:
        raise ValueError(f'el verificador admite hasta {MAX_VARIABLES_REJILLA} variables de camino')

    rejillas = [_rejilla_simplex(f.load, len(f.paths), divisiones) for f in scenario.flows]
    mejor, mejor_costo = None, np.inf
    for combinacion in product(*[range(len(r)) for r in rejillas]):
        x = np.concatenate([r[i] for r, i in zip(rejillas, combinacion)])
        costo = costo_con_y_optimo(x, scenario)
        if costo < mejor_costo:
            mejor, mejor_costo = x, costo

    libres = [int(scenario.starts[k]) + p for k, f in enumerate(scenario.flows) for p in range(len(f.paths) - 1)]
    radio = max(scenario.loads.max(initial=0.0) / divisiones, radio_minimo)
    desplazamientos = np.array(list(product((-1.0, -0.5, 0.0, 0.5, 1.0), repeat=len(libres))))
    for _ in range(max_rondas):
        if radio < radio_minimo or not libres:
            break
        candidatos = np.repeat(mejor[None, :], len(desplazamientos), axis=0)
        candidatos[:, libres] += radio * desplazamientos
        for k, flujo in enumerate(scenario.flows):
            ultimo = int(scenario.starts[k]) + len(flujo.paths) - 1
            inicio = int(scenario.starts[k])
            candidatos[:, ultimo] = flujo.load - candidatos[:, inicio:ultimo].sum(axis=1)
        factibles = np.all(candidatos >= 0.0, axis=1)
        if not factibles.any():
            radio *= 0.5
            continue
        costos = costo_con_y_optimo(candidatos[factibles], scenario)
        k = int(np.argmin(costos))
        if costos[k] < mejor_costo - 1e-15:
            mejor, mejor_costo = candidatos[factibles][k], float(costos[k])
        else:
            radio *= 0.5
    return float(mejor_costo), mejor


def optimality_certificate(solution: OracleSolution, scenario, delta: float = 1e-4) -> float:
    """
    Mayor disminución del costo exacto entre todas las perturbaciones
    factibles de una coordenada: y_h +- delta, o delta de masa trasladada
    entre dos caminos de un mismo flujo. Negativo si todas empeoran.
    """
    base = exact_total_cost(solution.state, scenario)
    mejor = -np.inf
    for h in range(scenario.n_hyperlinks):
        for signo in (1.0, -1.0):
            y = solution.y.copy()
            y[h] += signo * delta
            if y[h] < 0:
                continue
            mejor = max(mejor, base - exact_total_cost(SystemState(solution.x, y), scenario))
    for k, flujo in enumerate(scenario.flows):
        inicio = int(scenario.starts[k])
        for p in range(len(flujo.paths)):
            if solution.x[inicio + p] < delta:
                continue
            for q in range(len(flujo.paths)):
                if p == q:
                    continue
                x = solution.x.copy()
                x[inicio + p] -= delta
                x[inicio + q] += delta
                mejor = max(mejor, base - exact_total_cost(SystemState(x, solution.y), scenario))
    return float(mejor)


def proyectar_simplex(v: np.ndarray, total: float) -> np.ndarray:
    """Proyección euclídea sobre {x >= 0, suma = total} por ordenamiento."""
    if v.size == 0:
        return v
    u = np.sort(v)[::-1]
    acumulado = np.cumsum(u) - total
    indices = np.arange(1, v.size + 1)
    rho = np.flatnonzero(u - acumulado / indices > 0)[-1]
    return np.maximum(v - acumulado[rho] / (rho + 1), 0.0)


def _proyectar(z, scenario):
    x = z[:scenario.n_vars].copy()
    for k, flujo in enumerate(scenario.flows):
        tramo = slice(int(scenario.starts[k]), int(scenario.starts[k]) + len(flujo.paths))
        x[tramo] = proyectar_simplex(x[tramo], flujo.load)
    return np.concatenate([x, np.maximum(z[scenario.n_vars:], 0.0)])


def _minimizar_suavizado(z0, scenario, sp, max_iter=3000, tol=1e-12):
    """Gradiente proyectado con retroceso de Armijo sobre (X, Y)."""
    n = scenario.n_vars

    def valor(z):
        return smoothed_total_cost(SystemState(z[:n], z[n:]), scenario, sp)

    def gradiente(z):
        estado = SystemState(z[:n], z[n:])
        return np.concatenate([payoffs(estado, scenario, sp), -rebate_grads_y(estado, scenario, sp)])

    z = _proyectar(np.asarray(z0, dtype=float), scenario)
    f = valor(z)
    paso = 1.0
    for _ in range(max_iter):
        g = gradiente(z)
        while True:
            nuevo = _proyectar(z - paso * g, scenario)
            d = nuevo - z
            f_nuevo = valor(nuevo)
            if f_nuevo <= f + g @ d + (d @ d) / (2.0 * paso) or paso < 1e-14:
                break
            paso *= 0.5
        if f_nuevo > f or np.linalg.norm(d) < tol:
            break
        z, f = nuevo, f_nuevo
        paso *= 2.0
    return z, f


def smoothed_optimum(scenario, r_values=(-10.0, -50.0, -100.0), inicio: OracleSolution | None = None,
                     floor: float = 1e-12) -> dict[float, tuple[float, SystemState]]:
    """
    Mínimo conjunto del costo suavizado para cada r. Se recorre de r más
    negativo a menos negativo, arrancando del oráculo y luego de la solución
    anterior, de modo que los valores quedan ordenados y bajo el óptimo exacto.
    """
    if inicio is None:
        inicio = solve_optimal(scenario, polish=False)
    z = np.concatenate([inicio.x, inicio.y])
    resultados = {}
    for r in sorted(r_values):
        sp = SmoothingParams(r=r, floor=floor)
        z, valor = _minimizar_suavizado(z, scenario, sp)
        resultados[r] = (valor, SystemState(z[:scenario.n_vars].copy(), z[scenario.n_vars:].copy()))
        logger.debug('Óptimo suavizado r=%s: %.6f', r, valor)
    return resultados
