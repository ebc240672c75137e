"""
Controlador de capacidades de hiper-enlaces (escala lenta)
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from costos.modelo import (
    ParameterError, SmoothingParams, SystemState, rebate_grad_y, rebate_grads_y,
    smoothed_rebates,
)

from .bnn import MAX_REDUCCIONES

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ControllerParams:
    kappa: float = 0.5
    step: float = 1.0
    n_large: int = 50
    backtracking: bool = False

    def __post_init__(self):
        for campo in ('kappa', 'step', 'n_large'):
            if not getattr(self, campo) > 0:
                raise ParameterError(f'{campo} debe ser positivo (recibido {getattr(self, campo)})')


def capacity_gradient(h, state: SystemState, scenario, sp: SmoothingParams = SmoothingParams()) -> float:
    """dH/dy_h = -dT~/dy_h; solo depende de las dos tasas del hiper-enlace."""
    x_a = state.x[scenario.var_index(*h.side_a.pair)]
    x_b = state.x[scenario.var_index(*h.side_b.pair)]
    k = [g.id for g in scenario.hyperlinks].index(h.id)
    return -rebate_grad_y(h, x_a, x_b, state.y[k], sp)


def capacity_gradients(state: SystemState, scenario, sp: SmoothingParams = SmoothingParams()) -> np.ndarray:
    return -rebate_grads_y(state, scenario, sp)


def capacity_step(y: np.ndarray, gradients: np.ndarray, params: ControllerParams, step: float | np.ndarray | None = None) -> np.ndarray:
    """Euler proyectado: max(0, y - step * kappa * gradiente)."""
    paso = params.step if step is None else step
    return np.maximum(0.0, np.asarray(y, dtype=float) - paso * params.kappa * np.asarray(gradients, dtype=float))


def guarded_capacity_step(state: SystemState, scenario, sp: SmoothingParams, params: ControllerParams) -> np.ndarray:
    """
    capacity_step con retroceso por hiper-enlace: el paso de cada y_h se
    divide a la mitad hasta que su rebaja suavizada no disminuya con X fijo.
    """
    gradientes = capacity_gradients(state, scenario, sp)
    rebajas = smoothed_rebates(state, scenario, sp)
    pasos = np.full(scenario.n_hyperlinks, params.step)
    nuevo = capacity_step(state.y, gradientes, params, pasos)
    for _ in range(MAX_REDUCCIONES):
        empeora = smoothed_rebates(state.with_y(nuevo), scenario, sp) < rebajas
        if not np.any(empeora):
            return nuevo
        pasos = np.where(empeora, 0.5 * pasos, pasos)
        nuevo = capacity_step(state.y, gradientes, params, pasos)
    empeora = smoothed_rebates(state.with_y(nuevo), scenario, sp) < rebajas
    logger.debug('Retroceso de capacidades agotado en %d hiper-enlaces', int(empeora.sum()))
    return np.where(empeora, state.y, nuevo)


def controller_step(state: SystemState, scenario, sp: SmoothingParams, params: ControllerParams) -> np.ndarray:
    """Paso lento de run_decoupled: capacity_step, o su versión con retroceso si params.backtracking."""
    if params.backtracking:
        return guarded_capacity_step(state, scenario, sp, params)
    return capacity_step(state.y, capacity_gradients(state, scenario, sp), params)


def capacity_kkt_residual(state: SystemState, scenario, sp: SmoothingParams = SmoothingParams()) -> float:
    """
    Estacionariedad del problema de capacidades: |dH/dy| donde y > 0 y
    max(0, -dH/dy) donde y = 0.
    """
    if not scenario.n_hyperlinks:
        return 0.0
    gradientes = capacity_gradients(state, scenario, sp)
    residuos = np.where(state.y > 0, np.abs(gradientes), np.maximum(0.0, -gradientes))
    return float(residuos.max())
