"""
Dinámica desacoplada en dos escalas de tiempo

Este archivo contiene:
- TrajectoryRecord / PhaseSummary / Trajectory: series de la corrida
- run_phases: fases de BNN para un juego dado (reutilizado por las referencias)
- run_decoupled: controlador de capacidades + BNN con capacidades fijas
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from costos.modelo import SmoothingParams, SystemState, smoothed_total_cost

from .bnn import BnnParams, Juego, juego_desacoplado, run_small_timescale
from .control import ControllerParams, capacity_kkt_residual, controller_step
from .equilibrio import EquilibriumReport, brecha_wardrop, wardrop_report

logger = logging.getLogger(__name__)


class NonFiniteCostError(RuntimeError):
    """La corrida produjo un costo no finito."""


@dataclass(frozen=True)
class TrajectoryRecord:
    t: float
    x: np.ndarray
    y: np.ndarray
    cost_exact: float
    cost_smoothed: float
    wardrop_gap: float
    mean_payoffs: tuple[float, ...]
    phase: int


@dataclass(frozen=True)
class PhaseSummary:
    """Resumen al final de un paso largo; H es el costo suavizado equilibrado."""
    k: int
    H: float
    V: float
    cost_exact: float
    wardrop_gap: float
    flagged: bool
    capacity_residual: float


@dataclass
class Trajectory:
    method: str
    records: list[TrajectoryRecord] = field(default_factory=list)
    phases: list[PhaseSummary] = field(default_factory=list)

    def add(self, t, x, juego: Juego, scenario, phase: int) -> TrajectoryRecord:
        pagos = juego.pagos(x)
        brecha, medias = brecha_wardrop(x, pagos, scenario)
        registro = TrajectoryRecord(
            t=float(t),
            x=np.array(x, dtype=float),
            y=np.array(juego.capacidades(x), dtype=float),
            cost_exact=juego.costo_exacto(x),
            cost_smoothed=juego.potencial(x),
            wardrop_gap=brecha,
            mean_payoffs=tuple(medias),
            phase=phase,
        )
        if not (np.isfinite(registro.cost_exact) and np.isfinite(registro.cost_smoothed)):
            raise NonFiniteCostError(
                f'costo no finito en t={t} (fase {phase}): exacto {registro.cost_exact}, '
                f'suavizado {registro.cost_smoothed}'
            )
        self.records.append(registro)
        return registro

    @property
    def final(self) -> TrajectoryRecord:
        return self.records[-1]

    def small_descent_violations(self, slack: float = 1e-9) -> list[tuple[int, float, float]]:
        """(fase, t, aumento) donde el costo suavizado subió dentro de una fase corta."""
        violaciones = []
        for previo, actual in zip(self.records, self.records[1:]):
            if previo.phase != actual.phase:
                continue
            aumento = actual.cost_smoothed - previo.cost_smoothed
            if aumento > slack:
                violaciones.append((actual.phase, actual.t, aumento))
        return violaciones

    def large_descent_violations(self, rel_slack: float = 1e-6) -> list[tuple[int, float]]:
        """(k, aumento) donde H_k subió entre pasos largos no marcados."""
        violaciones = []
        for previo, actual in zip(self.phases, self.phases[1:]):
            if previo.flagged or actual.flagged:
                continue
            aumento = actual.H - previo.H
            if aumento > rel_slack * max(abs(previo.H), 1.0):
                violaciones.append((actual.k, aumento))
        return violaciones

    def flagged_phases(self) -> list[int]:
        return [f.k for f in self.phases if f.flagged]

    def mass_errors(self, scenario) -> float:
        """Mayor error relativo de conservación de masa en toda la trayectoria."""
        peor = 0.0
        for registro in self.records:
            errores = np.abs(scenario.flow_sums(registro.x) - scenario.loads) / np.maximum(scenario.loads, 1e-300)
            peor = max(peor, float(errores.max()) if errores.size else 0.0)
        return peor


def run_phases(x0: np.ndarray, juego_de: Callable[[int, np.ndarray], Juego], scenario, bnn: BnnParams,
               n_phases: int, trayectoria: Trajectory, tol: float = 0.05,
               kappa: float = 0.0, residuo: Callable[[np.ndarray], float] | None = None) -> np.ndarray:
    """
    n_phases fases cortas. `juego_de(k, x)` devuelve el juego de la fase k
    (para DD ahí ocurre el paso de capacidades). Cada fase agrega sus
    registros y un PhaseSummary a la trayectoria.
    """
    x = np.asarray(x0, dtype=float)
    t = trayectoria.final.t if trayectoria.records else 0.0
    if not trayectoria.records:
        trayectoria.add(t, x, juego_de(0, x), scenario, phase=0)
    for k in range(1, n_phases + 1):
        juego = juego_de(k, x)
        x, pasos = run_small_timescale(x, juego, scenario, bnn)
        for paso in pasos:
            t += paso.eta
            registro = trayectoria.add(t, paso.x, juego, scenario, phase=k)
        if not pasos:
            registro = trayectoria.add(t, x, juego, scenario, phase=k)
        marcado = registro.wardrop_gap > tol
        if marcado:
            logger.debug('Paso largo %d marcado: brecha %.4f > %.4f', k, registro.wardrop_gap, tol)
        trayectoria.phases.append(PhaseSummary(
            k=k,
            H=registro.cost_smoothed,
            V=kappa * registro.cost_smoothed,
            cost_exact=registro.cost_exact,
            wardrop_gap=registro.wardrop_gap,
            flagged=marcado,
            capacity_residual=residuo(x) if residuo is not None else 0.0,
        ))
    return x


def run_decoupled(scenario, sp: SmoothingParams = SmoothingParams(), bnn: BnnParams = BnnParams(),
                  ctrl: ControllerParams = ControllerParams(), initial: SystemState | None = None,
                  tol: float = 0.05) -> tuple[SystemState, Trajectory, EquilibriumReport]:
    """
    Dinámica desacoplada: cada paso largo aplica un paso del controlador de
    capacidades (con retroceso solo si ctrl.backtracking) y luego una fase
    corta completa de BNN con Y fija. Por defecto X parte uniforme y Y en cero.
    """
    if initial is None:
        initial = SystemState(scenario.uniform_split(), np.zeros(scenario.n_hyperlinks))
    estado = {'y': np.array(initial.y, dtype=float)}
    trayectoria = Trajectory(method='dd')

    def juego_de(k, x):
        if k > 0 and scenario.n_hyperlinks:
            estado['y'] = controller_step(SystemState(x, estado['y']), scenario, sp, ctrl)
        return juego_desacoplado(scenario, estado['y'], sp)

    logger.info('Dinámica desacoplada: %d pasos largos x %d cortos, r=%s, kappa=%s, retroceso=%s',
                ctrl.n_large, bnn.n_small, sp.r, ctrl.kappa, ctrl.backtracking)
    x = run_phases(
        initial.x, juego_de, scenario, bnn, ctrl.n_large, trayectoria, tol=tol, kappa=ctrl.kappa,
        residuo=lambda x: capacity_kkt_residual(SystemState(x, estado['y']), scenario, sp),
    )
    final = SystemState(x, estado['y'])
    informe = wardrop_report(x, juego_desacoplado(scenario, final.y, sp).pagos(x), scenario, tol)
    logger.info('Dinámica desacoplada terminada: costo exacto %.6f, suavizado %.6f, brecha %.4g',
                trayectoria.final.cost_exact, smoothed_total_cost(final, scenario, sp), informe.wardrop_gap)
    return final, trayectoria, informe
