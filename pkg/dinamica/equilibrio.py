"""
Diagnósticos de equilibrio

Este archivo contiene:
- FlowEquilibrium / EquilibriumReport: pagos, masas, holguras y brecha Wardrop
- wardrop_check / wardrop_report: equilibrio de Wardrop con tolerancia
- kkt_check: residuos de las condiciones de primer orden
- brecha_wardrop: solo la brecha, para registrar trayectorias
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from costos.modelo import SmoothingParams, SystemState, payoffs

# Un camino está en uso si lleva más que esta fracción de la carga
UMBRAL_USO = 1e-6


@dataclass(frozen=True)
class FlowEquilibrium:
    flow: int
    lam: float
    payoffs: tuple[float, ...]
    masses: tuple[float, ...]
    used: tuple[bool, ...]
    slacks: dict[int, float] = field(default_factory=dict)
    gap: float = 0.0


@dataclass(frozen=True)
class EquilibriumReport:
    flows: tuple[FlowEquilibrium, ...]
    wardrop_gap: float
    unused_violation: float
    kkt_residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.wardrop_gap <= self.tol and self.unused_violation <= self.tol

    def mean_payoffs(self) -> list[float]:
        return [f.lam for f in self.flows]

    def as_dict(self) -> dict:
        return {
            'wardrop_gap': self.wardrop_gap,
            'unused_violation': self.unused_violation,
            'kkt_residual': self.kkt_residual,
            'tol': self.tol,
            'passed': self.passed,
            'flows': [
                {
                    'flow': f.flow,
                    'lambda': f.lam,
                    'gap': f.gap,
                    'payoffs': list(f.payoffs),
                    'masses': list(f.masses),
                    'slacks': {str(p): s for p, s in f.slacks.items()},
                }
                for f in self.flows
            ],
        }


@dataclass(frozen=True)
class KktResiduals:
    used: float
    unused: float
    mass: float
    tol: float = 0.05

    @property
    def maximum(self) -> float:
        return max(self.used, self.unused, self.mass)

    @property
    def passed(self) -> bool:
        return self.maximum <= self.tol


def _residuos(x, pagos, scenario):
    """Por flujo: (lambda, en uso, brecha, violación en caminos sin uso, residuos KKT)."""
    masas = scenario.flow_sums(x)
    for k, flujo in enumerate(scenario.flows):
        tramo = slice(int(scenario.starts[k]), int(scenario.starts[k]) + len(flujo.paths))
        xs, fs = x[tramo], pagos[tramo]
        carga = scenario.loads[k]
        lam = float(fs @ xs / masas[k]) if masas[k] > 0 else float(fs.min())
        en_uso = xs > UMBRAL_USO * carga
        brecha = float(fs[en_uso].max() - fs[en_uso].min()) if en_uso.any() else 0.0
        sin_uso = float(np.maximum(0.0, lam - fs[~en_uso]).max()) if (~en_uso).any() else 0.0
        usados = float(np.abs(fs[en_uso] - lam).max()) if en_uso.any() else 0.0
        yield flujo, k, xs, fs, lam, en_uso, brecha, sin_uso, usados, abs(masas[k] - carga)


def wardrop_report(x: np.ndarray, pagos: np.ndarray, scenario, tol: float = 0.05) -> EquilibriumReport:
    """Informe de equilibrio para pagos arbitrarios (DD, CD o sin codificación)."""
    flujos = []
    brecha = violacion = kkt = 0.0
    for flujo, _, xs, fs, lam, en_uso, g, sin_uso, usados, masa in _residuos(x, pagos, scenario):
        holguras = {p + 1: float(fs[p] - lam) for p in range(len(xs)) if not en_uso[p]}
        flujos.append(FlowEquilibrium(
            flow=flujo.id, lam=lam,
            payoffs=tuple(float(v) for v in fs),
            masses=tuple(float(v) for v in xs),
            used=tuple(bool(u) for u in en_uso),
            slacks=holguras, gap=g,
        ))
        brecha = max(brecha, g)
        violacion = max(violacion, sin_uso)
        kkt = max(kkt, usados, sin_uso, masa)
    return EquilibriumReport(tuple(flujos), brecha, violacion, kkt, tol)


def wardrop_check(state: SystemState, scenario, sp: SmoothingParams = SmoothingParams(), tol: float = 0.05) -> EquilibriumReport:
    """
    Equilibrio de Wardrop: los caminos usados de cada flujo tienen el mismo
    pago (brecha <= tol) y ningún camino sin uso es más barato que lambda - tol.
    """
    return wardrop_report(state.x, payoffs(state, scenario, sp), scenario, tol)


def kkt_check(state: SystemState, scenario, sp: SmoothingParams = SmoothingParams(), tol: float = 0.05, pagos=None) -> KktResiduals:
    if pagos is None:
        pagos = payoffs(state, scenario, sp)
    usado = sin_uso = masa = 0.0
    for *_, u_sin, u_usado, u_masa in _residuos(state.x, pagos, scenario):
        usado = max(usado, u_usado)
        sin_uso = max(sin_uso, u_sin)
        masa = max(masa, u_masa)
    return KktResiduals(used=usado, unused=sin_uso, mass=masa, tol=tol)


def brecha_wardrop(x: np.ndarray, pagos: np.ndarray, scenario) -> tuple[float, list[float]]:
    """Brecha Wardrop y pagos medios por flujo, sin armar el informe completo."""
    brecha = 0.0
    medias = []
    for _, _, _, _, lam, _, g, *_ in _residuos(x, pagos, scenario):
        brecha = max(brecha, g)
        medias.append(lam)
    return brecha, medias
