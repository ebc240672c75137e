"""
Comparación de los cuatro sistemas sobre un mismo escenario
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from costos.modelo import SmoothingParams
from dinamica.bnn import BnnParams
from dinamica.control import ControllerParams
from dinamica.desacoplada import NonFiniteCostError, run_decoupled

from .oraculo import solve_optimal
from .sistemas import run_coupled, run_no_coding

logger = logging.getLogger(__name__)

HOLGURA_ORDEN = 1e-6
METODOS = ('oracle', 'dd', 'cd', 'nocoding')


@dataclass(frozen=True)
class ComparisonRow:
    method: str
    cost_exact: float
    x: np.ndarray
    y: np.ndarray
    iterations: int
    runtime: float
    wardrop_gap: float | None
    series: tuple[float, ...] = ()


@dataclass(frozen=True)
class OrderingCheck:
    name: str
    lower: float
    upper: float

    @property
    def passed(self) -> bool:
        return self.lower <= self.upper + HOLGURA_ORDEN


@dataclass
class ComparisonReport:
    rows: dict[str, ComparisonRow] = field(default_factory=dict)
    checks: list[OrderingCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def dd_minus_cd(self) -> float:
        """Diferencia DD - CD; se reporta sin exigir signo."""
        return self.rows['dd'].cost_exact - self.rows['cd'].cost_exact

    def gap_to_oracle(self, method: str) -> float:
        optimo = self.rows['oracle'].cost_exact
        return (self.rows[method].cost_exact - optimo) / max(abs(optimo), 1e-12)


def _cronometrar(fn):
    inicio = time.perf_counter()
    resultado = fn()
    return resultado, time.perf_counter() - inicio


def compare_report(scenario, sp: SmoothingParams = SmoothingParams(), bnn: BnnParams = BnnParams(),
                   ctrl: ControllerParams = ControllerParams(), tol: float = 0.05) -> ComparisonReport:
    """
    Corre oráculo, DD, CD y sin codificación y revisa el orden de costos:
    oráculo <= DD, oráculo <= CD, DD <= sin codificación, CD <= sin codificación.
    """
    informe = ComparisonReport()
    pasos = ctrl.n_large * bnn.n_small

    oraculo, segundos = _cronometrar(lambda: solve_optimal(scenario, sp))
    informe.rows['oracle'] = ComparisonRow(
        'oracle', oraculo.cost, oraculo.x, oraculo.y, oraculo.iterations, segundos, None,
        series=tuple([oraculo.cost] * ctrl.n_large),
    )

    (estado, trayectoria, equilibrio), segundos = _cronometrar(lambda: run_decoupled(scenario, sp, bnn, ctrl, tol=tol))
    informe.rows['dd'] = ComparisonRow(
        'dd', trayectoria.final.cost_exact, estado.x, estado.y, pasos, segundos, equilibrio.wardrop_gap,
        series=tuple(f.cost_exact for f in trayectoria.phases),
    )

    (x, trayectoria, equilibrio), segundos = _cronometrar(
        lambda: run_coupled(scenario, sp, bnn, ctrl.n_large, tol))
    informe.rows['cd'] = ComparisonRow(
        'cd', trayectoria.final.cost_exact, x, trayectoria.final.y, pasos, segundos, equilibrio.wardrop_gap,
        series=tuple(f.cost_exact for f in trayectoria.phases),
    )

    (x, costo, trayectoria, equilibrio), segundos = _cronometrar(
        lambda: run_no_coding(scenario, bnn, ctrl.n_large, tol))
    serie = [f.cost_exact for f in trayectoria.phases]
    serie[-1] = costo
    informe.rows['nocoding'] = ComparisonRow(
        'nocoding', costo, x, trayectoria.final.y, pasos, segundos, equilibrio.wardrop_gap,
        series=tuple(serie),
    )

    for fila in informe.rows.values():
        if not np.isfinite(fila.cost_exact):
            raise NonFiniteCostError(f'costo no finito para el método {fila.method}')

    costos = {m: informe.rows[m].cost_exact for m in METODOS}
    informe.checks = [
        OrderingCheck('oracle <= dd', costos['oracle'], costos['dd']),
        OrderingCheck('oracle <= cd', costos['oracle'], costos['cd']),
        OrderingCheck('dd <= nocoding', costos['dd'], costos['nocoding']),
        OrderingCheck('cd <= nocoding', costos['cd'], costos['nocoding']),
    ]
    for chequeo in informe.checks:
        if not chequeo.passed:
            logger.warning('Orden de costos violado: %s (%.6f > %.6f)', chequeo.name, chequeo.lower, chequeo.upper)
    logger.info('Comparación: oráculo %.6f, DD %.6f, CD %.6f, sin codificación %.6f (DD - CD = %.6f)',
                costos['oracle'], costos['dd'], costos['cd'], costos['nocoding'], informe.dd_minus_cd)
    return informe
