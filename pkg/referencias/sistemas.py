"""
Sistemas de comparación: sin codificación y dinámica acoplada
"""

from __future__ import annotations

import logging

import numpy as np

from costos.modelo import SmoothingParams
from dinamica.bnn import BnnParams, juego_acoplado, juego_sin_codificacion
from dinamica.desacoplada import Trajectory, run_phases
from dinamica.equilibrio import EquilibriumReport, wardrop_report

logger = logging.getLogger(__name__)

# Tolerancia para considerar empatados dos costos base
EMPATE_BETA = 1e-9


def concentrar_en_minimos(x: np.ndarray, scenario) -> np.ndarray:
    """
    Límite de la dinámica sin codificación: la masa de cada flujo pasa a sus
    caminos de beta mínimo, repartida en proporción a lo que ya llevaban.
    """
    resultado = np.zeros_like(x)
    for k, flujo in enumerate(scenario.flows):
        tramo = slice(int(scenario.starts[k]), int(scenario.starts[k]) + len(flujo.paths))
        betas = scenario.beta[tramo]
        minimos = betas <= betas.min() + EMPATE_BETA
        pesos = np.where(minimos, x[tramo], 0.0)
        if pesos.sum() <= 0:
            pesos = minimos.astype(float)
        resultado[tramo] = flujo.load * pesos / pesos.sum()
    return resultado


def run_no_coding(scenario, bnn: BnnParams = BnnParams(), n_large: int = 50, tol: float = 0.05,
                  x0: np.ndarray | None = None) -> tuple[np.ndarray, float, Trajectory, EquilibriumReport]:
    """
    BNN con pagos iguales a beta. Tras las fases se reporta el límite de la
    dinámica; su costo es exactamente sum_i x_i * min_p beta_i^p.
    """
    juego = juego_sin_codificacion(scenario)
    trayectoria = Trajectory(method='nocoding')
    x = run_phases(scenario.uniform_split() if x0 is None else x0,
                   lambda k, x: juego, scenario, bnn, n_large, trayectoria, tol=tol)
    x = concentrar_en_minimos(x, scenario)
    trayectoria.add(trayectoria.final.t, x, juego, scenario, phase=n_large)
    costo = juego.costo_exacto(x)
    logger.info('Sin codificación: costo %.6f', costo)
    return x, costo, trayectoria, wardrop_report(x, juego.pagos(x), scenario, tol)


def run_coupled(scenario, sp: SmoothingParams = SmoothingParams(), bnn: BnnParams = BnnParams(),
                n_large: int = 50, tol: float = 0.05,
                x0: np.ndarray | None = None) -> tuple[np.ndarray, Trajectory, EquilibriumReport]:
    """
    BNN sobre el costo acoplado suavizado, con el mismo r que la dinámica
    desacoplada. El costo exacto usa y_h = min(x_a, x_b).
    """
    juego = juego_acoplado(scenario, sp)
    trayectoria = Trajectory(method='cd')
    x = run_phases(scenario.uniform_split() if x0 is None else x0,
                   lambda k, x: juego, scenario, bnn, n_large, trayectoria, tol=tol)
    logger.info('Dinámica acoplada: costo exacto %.6f', trayectoria.final.cost_exact)
    return x, trayectoria, wardrop_report(x, juego.pagos(x), scenario, tol)
