"""
Dinámica BNN modificada para la división de tráfico (escala rápida)

Este archivo contiene:
- BnnParams: paso, número de pasos cortos y renormalización
- Juego: potencial y pagos de un juego de población (DD, CD o sin codificación)
- bnn_derivative / bnn_step / run_small_timescale
- bnn_lyapunov_rate: derivada del potencial a lo largo del campo BNN
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from costos.modelo import (
    ParameterError, SmoothingParams, SystemState, coupled_cost, coupled_exact_cost,
    coupled_payoffs, exact_total_cost, payoffs, smoothed_total_cost,
)

logger = logging.getLogger(__name__)

MAX_REDUCCIONES = 30


class DegenerateFlowError(ValueError):
    """Flujo sin masa: el promedio de pagos no está definido."""


@dataclass(frozen=True)
class BnnParams:
    eta: float = 0.05
    n_small: int = 20
    renormalize: bool = True

    def __post_init__(self):
        if not self.eta > 0:
            raise ParameterError(f'eta debe ser positivo (recibido {self.eta})')
        if not self.n_small >= 1:
            raise ParameterError(f'n_small debe ser al menos 1 (recibido {self.n_small})')


@dataclass(frozen=True)
class Juego:
    """
    Juego de potencial sobre las divisiones X. `pagos` es el gradiente de
    `potencial`; `capacidades` da la Y implícita que se reporta en la
    trayectoria y `costo_exacto` el costo real del estado.
    """
    nombre: str
    potencial: Callable[[np.ndarray], float]
    pagos: Callable[[np.ndarray], np.ndarray]
    costo_exacto: Callable[[np.ndarray], float]
    capacidades: Callable[[np.ndarray], np.ndarray]


def juego_desacoplado(scenario, y: np.ndarray, sp: SmoothingParams) -> Juego:
    """Costo suavizado con capacidades fijas."""
    y = np.asarray(y, dtype=float)
    return Juego(
        nombre='dd',
        potencial=lambda x: smoothed_total_cost(SystemState(x, y), scenario, sp),
        pagos=lambda x: payoffs(SystemState(x, y), scenario, sp),
        costo_exacto=lambda x: exact_total_cost(SystemState(x, y), scenario),
        capacidades=lambda x: y,
    )


def juego_acoplado(scenario, sp: SmoothingParams) -> Juego:
    return Juego(
        nombre='cd',
        potencial=lambda x: coupled_cost(x, scenario, sp),
        pagos=lambda x: coupled_payoffs(x, scenario, sp),
        costo_exacto=lambda x: coupled_exact_cost(x, scenario),
        capacidades=lambda x: np.minimum(x[scenario.side_a], x[scenario.side_b]),
    )


def juego_sin_codificacion(scenario) -> Juego:
    ceros = np.zeros(scenario.n_hyperlinks)
    return Juego(
        nombre='nocoding',
        potencial=lambda x: float(scenario.beta @ x),
        pagos=lambda x: scenario.beta.copy(),
        costo_exacto=lambda x: float(scenario.beta @ x),
        capacidades=lambda x: ceros,
    )


def campo_bnn(x: np.ndarray, pagos: np.ndarray, scenario) -> tuple[np.ndarray, np.ndarray]:
    """
    Campo BNN para costos (menor es mejor). Devuelve (x_punto, gamma) donde
    gamma es el exceso del pago medio sobre el pago de cada camino.
    """
    masas = scenario.flow_sums(x)
    if np.any(masas <= 0):
        k = int(np.argmax(masas <= 0))
        raise DegenerateFlowError(f'el flujo {scenario.flows[k].id} no tiene masa')
    media = np.add.reduceat(pagos * x, scenario.starts) / masas
    gamma = np.maximum(media[scenario.flow_of_var] - pagos, 0.0)
    suma_gamma = np.add.reduceat(gamma, scenario.starts)
    x_punto = masas[scenario.flow_of_var] * gamma - x * suma_gamma[scenario.flow_of_var]
    return x_punto, gamma


def bnn_derivative(flow: int, state: SystemState, scenario, sp: SmoothingParams = SmoothingParams()) -> np.ndarray:
    """x_punto del flujo `flow` bajo los pagos del costo suavizado."""
    tramo = scenario.flow_slice(flow)
    x = state.x
    if not x[tramo].sum() > 0:
        raise DegenerateFlowError(f'el flujo {flow} no tiene masa')
    pagos = payoffs(state, scenario, sp)
    return campo_bnn(x, pagos, scenario)[0][tramo]


def bnn_step(x: np.ndarray, juego: Juego, scenario, params: BnnParams, eta: float | None = None) -> np.ndarray:
    """Paso de Euler explícito, recorte en cero y renormalización por flujo."""
    eta = params.eta if eta is None else eta
    x_punto, _ = campo_bnn(x, juego.pagos(x), scenario)
    nuevo = np.maximum(x + eta * x_punto, 0.0)
    if params.renormalize:
        sumas = scenario.flow_sums(nuevo)
        nuevo = nuevo * (scenario.loads / sumas)[scenario.flow_of_var]
    return nuevo


@dataclass(frozen=True)
class PasoCorto:
    x: np.ndarray
    potencial: float
    eta: float


def run_small_timescale(x: np.ndarray, juego: Juego, scenario, params: BnnParams) -> tuple[np.ndarray, list[PasoCorto]]:
    """
    n_small pasos BNN con el juego fijo. Si un paso aumenta el potencial,
    eta se reduce a la mitad; tras MAX_REDUCCIONES intentos X se conserva.
    """
    actual = np.asarray(x, dtype=float)
    valor = juego.potencial(actual)
    pasos = []
    for _ in range(params.n_small):
        eta = params.eta
        for _ in range(MAX_REDUCCIONES):
            candidato = bnn_step(actual, juego, scenario, params, eta)
            valor_candidato = juego.potencial(candidato)
            if valor_candidato <= valor:
                actual, valor = candidato, valor_candidato
                break
            eta *= 0.5
        else:
            logger.debug('Retroceso agotado en el juego %s; X se conserva', juego.nombre)
            eta = 0.0
        pasos.append(PasoCorto(actual, valor, eta))
    return actual, pasos


def bnn_lyapunov_rate(state: SystemState, scenario, sp: SmoothingParams = SmoothingParams()) -> tuple[float, float]:
    """
    Derivada del costo suavizado a lo largo del campo BNN y su cota
    -sum_i x_i sum_p gamma_p^2; ambas coinciden salvo redondeo.
    """
    pagos = payoffs(state, scenario, sp)
    x_punto, gamma = campo_bnn(state.x, pagos, scenario)
    masas = scenario.flow_sums(state.x)
    cota = -float(masas @ np.add.reduceat(gamma ** 2, scenario.starts))
    return float(pagos @ x_punto), cota
