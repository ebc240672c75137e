"""
Aritmética de costos del sistema con codificación en reversa

Este archivo contiene:
- SmoothingParams, SystemState
- r_mean: media generalizada con exponente negativo (aproximación suave del mínimo)
- exact_rebate / smoothed_rebate y sus versiones por escenario
- exact_total_cost / smoothed_total_cost
- payoffs / payoff: derivada del costo suavizado respecto de cada camino
- rebate_grad_y / rebate_grads_y: derivada de la rebaja suavizada respecto de y
- coupled_cost / coupled_payoffs / coupled_exact_cost: sistema sin capacidades
- finite_diff_check / gradient_check: contraste con diferencias centrales

Todas las funciones son puras; los vectores X e Y siguen el orden de Scenario.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

LOG2 = math.log(2.0)

# Por debajo de este exponente las diferencias finitas no son confiables
R_MINIMO_DIFERENCIAS = -20.0


class ParameterError(ValueError):
    """Parámetro numérico fuera de su dominio."""


@dataclass(frozen=True)
class SmoothingParams:
    r: float = -100.0
    floor: float = 1e-12

    def __post_init__(self):
        if not self.r < 0:
            raise ParameterError(f'r debe ser negativo (recibido {self.r})')
        if not self.floor > 0:
            raise ParameterError(f'el piso debe ser positivo (recibido {self.floor})')


@dataclass(frozen=True)
class SystemState:
    """Par (X, Y): divisiones por camino y capacidades por hiper-enlace."""
    x: np.ndarray
    y: np.ndarray

    def with_x(self, x) -> 'SystemState':
        return SystemState(np.asarray(x, dtype=float), self.y)

    def with_y(self, y) -> 'SystemState':
        return SystemState(self.x, np.asarray(y, dtype=float))


def state_violations(state: SystemState, scenario, tol: float = 1e-9) -> list[str]:
    """Problemas de dimensión, signo o conservación de masa de un estado."""
    problemas = []
    if state.x.shape != (scenario.n_vars,):
        return [f'X tiene {state.x.size} componentes, se esperaban {scenario.n_vars}']
    if state.y.shape != (scenario.n_hyperlinks,):
        return [f'Y tiene {state.y.size} componentes, se esperaban {scenario.n_hyperlinks}']
    if not (np.all(np.isfinite(state.x)) and np.all(np.isfinite(state.y))):
        problemas.append('estado con valores no finitos')
    if np.any(state.x < 0):
        problemas.append('X con componentes negativas')
    if np.any(state.y < 0):
        problemas.append('Y con componentes negativas')
    sumas = scenario.flow_sums(state.x)
    for flujo, suma, carga in zip(scenario.flows, sumas, scenario.loads):
        if abs(suma - carga) > tol * max(carga, 1.0):
            problemas.append(f'el flujo {flujo.id} suma {suma:.6g} en lugar de {carga:.6g}')
    return problemas


def _media_r(a, b, r, floor):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m = np.minimum(a, b)
    grande = np.maximum(a, b)
    m_seguro = np.maximum(m, floor)
    log_m = np.log(m_seguro)
    log_grande = np.log(np.maximum(grande, floor))
    log_media = log_m + (np.logaddexp(0.0, r * (log_grande - log_m)) - LOG2) / r
    return np.where(m < floor, 0.0, np.exp(log_media))


def _potencia_cociente(u, v, r, floor):
    """(u / M_r(u, v))^(r-1), con ambos argumentos elevados al piso."""
    log_u = np.log(np.maximum(np.asarray(u, dtype=float), floor))
    log_v = np.log(np.maximum(np.asarray(v, dtype=float), floor))
    return np.exp(((r - 1.0) / r) * (LOG2 - np.logaddexp(0.0, r * (log_v - log_u))))


def r_mean(values, r: float, floor: float = 1e-12):
    """
    Media generalizada M_r(a, b) = ((a^r + b^r)/2)^(1/r) para r < 0.
    Se evalúa factorizando el mínimo para no desbordar a^r; si el mínimo
    está por debajo del piso el resultado es 0.
    """
    if not r < 0:
        raise ParameterError(f'r debe ser negativo (recibido {r})')
    a, b = values
    resultado = _media_r(a, b, r, floor)
    return float(resultado) if resultado.ndim == 0 else resultado


def exact_rebate(h, x_a: float, x_b: float, y: float) -> float:
    return (h.side_a.alpha * min(x_a, y) + h.side_b.alpha * min(x_b, y)
            - h.alpha_max * y)


def smoothed_rebate(h, x_a: float, x_b: float, y: float, sp: SmoothingParams = SmoothingParams()) -> float:
    return float(h.side_a.alpha * _media_r(x_a, y, sp.r, sp.floor)
                 + h.side_b.alpha * _media_r(x_b, y, sp.r, sp.floor)
                 - h.alpha_max * y)


def exact_rebates(state: SystemState, scenario) -> np.ndarray:
    x, y = state.x, state.y
    return (scenario.alpha_a * np.minimum(x[scenario.side_a], y)
            + scenario.alpha_b * np.minimum(x[scenario.side_b], y)
            - scenario.alpha_max * y)


def smoothed_rebates(state: SystemState, scenario, sp: SmoothingParams) -> np.ndarray:
    x, y = state.x, state.y
    return (scenario.alpha_a * _media_r(x[scenario.side_a], y, sp.r, sp.floor)
            + scenario.alpha_b * _media_r(x[scenario.side_b], y, sp.r, sp.floor)
            - scenario.alpha_max * y)


def exact_total_cost(state: SystemState, scenario) -> float:
    """C(X, Y) = suma de beta por tasa menos las rebajas exactas."""
    return float(scenario.beta @ state.x - exact_rebates(state, scenario).sum())


def smoothed_total_cost(state: SystemState, scenario, sp: SmoothingParams = SmoothingParams()) -> float:
    return float(scenario.beta @ state.x - smoothed_rebates(state, scenario, sp).sum())


def payoffs(state: SystemState, scenario, sp: SmoothingParams = SmoothingParams()) -> np.ndarray:
    """
    Pago F de cada camino (menor es mejor): beta menos el descuento de
    cada hiper-enlace que toca el camino.
    """
    x, y = state.x, state.y
    pagos = scenario.beta.copy()
    if scenario.n_hyperlinks:
        np.subtract.at(pagos, scenario.side_a,
                       0.5 * scenario.alpha_a * _potencia_cociente(x[scenario.side_a], y, sp.r, sp.floor))
        np.subtract.at(pagos, scenario.side_b,
                       0.5 * scenario.alpha_b * _potencia_cociente(x[scenario.side_b], y, sp.r, sp.floor))
    return pagos


def payoff(flow: int, path: int, state: SystemState, scenario, sp: SmoothingParams = SmoothingParams()) -> float:
    return float(payoffs(state, scenario, sp)[scenario.var_index(flow, path)])


def rebate_grad_y(h, x_a: float, x_b: float, y: float, sp: SmoothingParams = SmoothingParams()) -> float:
    """Derivada de la rebaja suavizada de h respecto de su capacidad."""
    return float(0.5 * h.side_a.alpha * _potencia_cociente(y, x_a, sp.r, sp.floor)
                 + 0.5 * h.side_b.alpha * _potencia_cociente(y, x_b, sp.r, sp.floor)
                 - h.alpha_max)


def rebate_grads_y(state: SystemState, scenario, sp: SmoothingParams = SmoothingParams()) -> np.ndarray:
    x, y = state.x, state.y
    return (0.5 * scenario.alpha_a * _potencia_cociente(y, x[scenario.side_a], sp.r, sp.floor)
            + 0.5 * scenario.alpha_b * _potencia_cociente(y, x[scenario.side_b], sp.r, sp.floor)
            - scenario.alpha_max)


def coupled_cost(x: np.ndarray, scenario, sp: SmoothingParams = SmoothingParams()) -> float:
    """Costo suavizado del sistema acoplado: el ahorro depende de M_r(x_a, x_b)."""
    ahorro = scenario.alpha_min * _media_r(x[scenario.side_a], x[scenario.side_b], sp.r, sp.floor)
    return float(scenario.beta @ x - ahorro.sum())


def coupled_payoffs(x: np.ndarray, scenario, sp: SmoothingParams = SmoothingParams()) -> np.ndarray:
    pagos = scenario.beta.copy()
    if scenario.n_hyperlinks:
        xa, xb = x[scenario.side_a], x[scenario.side_b]
        np.subtract.at(pagos, scenario.side_a,
                       0.5 * scenario.alpha_min * _potencia_cociente(xa, xb, sp.r, sp.floor))
        np.subtract.at(pagos, scenario.side_b,
                       0.5 * scenario.alpha_min * _potencia_cociente(xb, xa, sp.r, sp.floor))
    return pagos


def coupled_exact_cost(x: np.ndarray, scenario) -> float:
    """Igual a exact_total_cost con y_h = min(x_a, x_b)."""
    ahorro = scenario.alpha_min * np.minimum(x[scenario.side_a], x[scenario.side_b])
    return float(scenario.beta @ x - ahorro.sum())


def finite_diff_check(fn, point, h_step: float, gradient) -> float:
    """
    Máximo error relativo entre `gradient` y las diferencias centrales de
    `fn` en `point`. El error se normaliza por max(|analítico|, |numérico|, 1).
    """
    punto = np.asarray(point, dtype=float)
    analitico = np.asarray(gradient, dtype=float)
    peor = 0.0
    for k in range(punto.size):
        e = np.zeros_like(punto)
        e[k] = h_step
        numerico = (fn(punto + e) - fn(punto - e)) / (2.0 * h_step)
        escala = max(abs(analitico[k]), abs(numerico), 1.0)
        peor = max(peor, abs(analitico[k] - numerico) / escala)
    return peor


@dataclass(frozen=True)
class GradientReport:
    payoff_error: float | None
    capacity_error: float | None
    skipped: bool = False

    def passed(self, tol: float = 1e-4) -> bool:
        return self.skipped or max(self.payoff_error, self.capacity_error) <= tol


def gradient_check(state: SystemState, scenario, sp: SmoothingParams, h_step: float = 1e-6) -> GradientReport:
    """
    Contrasta pagos y derivadas de capacidad contra diferencias centrales del
    costo suavizado. Para r por debajo de -20 el chequeo se omite.
    """
    if sp.r < R_MINIMO_DIFERENCIAS:
        logger.info('Chequeo de gradientes omitido para r = %s', sp.r)
        return GradientReport(None, None, skipped=True)

    error_x = finite_diff_check(
        lambda x: smoothed_total_cost(state.with_x(x), scenario, sp),
        state.x, h_step, payoffs(state, scenario, sp),
    )
    error_y = 0.0
    if scenario.n_hyperlinks:
        error_y = finite_diff_check(
            lambda y: smoothed_total_cost(state.with_y(y), scenario, sp),
            state.y, h_step, -rebate_grads_y(state, scenario, sp),
        )
    logger.debug('Errores relativos: pagos %.3e, capacidades %.3e', error_x, error_y)
    return GradientReport(error_x, error_y)
