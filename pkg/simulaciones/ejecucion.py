"""
Orquestación de corridas

Este archivo contiene:
- RunConfig y build_run_config (precedencia: CLI > escenario > ajustes)
- obtener_escenario: archivo o generador con semilla
- leer_estado_inicial: X e Y iniciales desde JSON
- ejecutar_metodo / ejecutar_run: corre un método y escribe sus archivos
- ejecutar_comparacion: los cuatro métodos, tabla y series de costos
- chequear_gradientes: diferencias finitas sobre estados aleatorios
"""

from __future__ import annotations

import json
import logging
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from django.conf import settings
from django.core.management.base import CommandError

from costos.modelo import (
    ParameterError, SmoothingParams, SystemState, exact_total_cost, gradient_check,
    smoothed_total_cost, state_violations,
)
from dinamica.bnn import BnnParams, DegenerateFlowError, bnn_lyapunov_rate, juego_desacoplado
from dinamica.control import ControllerParams, capacity_kkt_residual
from dinamica.desacoplada import NonFiniteCostError, Trajectory, run_decoupled
from dinamica.equilibrio import kkt_check, wardrop_check
from referencias.comparacion import compare_report
from referencias.oraculo import optimality_certificate, smoothed_optimum, solve_optimal
from referencias.simplex import LinearProgramError
from referencias.sistemas import run_coupled, run_no_coding
from topologia.escenarios import ScenarioParseError, load_scenario, scenario_hash
from topologia.forms import primer_error
from topologia.generador import generate_random_scenario
from topologia.red import InvalidScenarioError, StructuralError, resolve

from .forms import RunConfigForm
from .models import Ejecucion
from .procedencia import procedencia, version_compilacion
from .salidas import escribir_comparacion, escribir_json, escribir_series, escribir_trayectoria, etiquetar

logger = logging.getLogger(__name__)

EXITO, ESCENARIO_INVALIDO, ERROR_FORMATO, SIN_CONVERGENCIA = 0, 1, 2, 3
METODOS_INDIVIDUALES = ('dd', 'cd', 'nocoding', 'oracle')
VALORES_R_SUAVIZADOS = (-10.0, -50.0, -100.0)


@dataclass(frozen=True)
class RunConfig:
    method: str
    scenario_path: str | None
    seed: int | None
    sp: SmoothingParams
    bnn: BnnParams
    ctrl: ControllerParams
    tol: float
    initial_state: str | None
    out: Path

    def params_echo(self) -> dict:
        return {
            'r': self.sp.r,
            'floor': self.sp.floor,
            'eta': self.bnn.eta,
            'n_small': self.bnn.n_small,
            'kappa': self.ctrl.kappa,
            'step': self.ctrl.step,
            'n_large': self.ctrl.n_large,
            'backtracking': self.ctrl.backtracking,
            'tol': self.tol,
            'seed': self.seed,
        }


def validar_opciones(opciones: dict) -> dict:
    """Revisa las opciones de línea de comandos con RunConfigForm."""
    datos = {k: v for k, v in opciones.items() if v is not None}
    form = RunConfigForm(data=datos)
    if not form.is_valid():
        raise ParameterError(primer_error(form))
    return form.cleaned_data


def obtener_escenario(datos: dict):
    """ScenarioConfig desde --scenario o, en su defecto, generado con --seed."""
    if datos.get('scenario'):
        return load_scenario(datos['scenario'])
    return generate_random_scenario(datos['seed'])


def build_run_config(datos: dict, params_escenario) -> RunConfig:
    declarados = params_escenario.declarados()

    def elegir(campo, ajuste):
        if datos.get(campo) is not None:
            return datos[campo]
        if campo in declarados:
            return declarados[campo]
        return getattr(settings, ajuste)

    return RunConfig(
        method=datos.get('method') or 'dd',
        scenario_path=datos.get('scenario') or None,
        seed=datos.get('seed'),
        sp=SmoothingParams(r=elegir('r', 'SIMULADOR_R'), floor=elegir('floor', 'SIMULADOR_PISO')),
        bnn=BnnParams(eta=elegir('eta', 'SIMULADOR_ETA'), n_small=elegir('n_small', 'SIMULADOR_PASOS_CORTOS')),
        ctrl=ControllerParams(
            kappa=elegir('kappa', 'SIMULADOR_KAPPA'),
            step=elegir('step', 'SIMULADOR_PASO'),
            n_large=elegir('n_large', 'SIMULADOR_PASOS_LARGOS'),
            backtracking=elegir('backtracking', 'SIMULADOR_RETROCESO_CAPACIDADES'),
        ),
        tol=elegir('tol', 'SIMULADOR_TOLERANCIA'),
        initial_state=datos.get('initial_state') or None,
        out=Path(datos.get('out') or settings.SIMULADOR_DIRECTORIO_SALIDA),
    )


def leer_estado_inicial(ruta, scenario) -> SystemState:
    """
    JSON {"x": {"x_i_p": v}, "y": {"y_h": v}}. Toda x_i_p es obligatoria;
    las y ausentes valen 0.
    """
    try:
        datos = json.loads(Path(ruta).read_text(encoding='utf-8'))
        valores_x = datos['x']
        valores_y = datos.get('y', {})
        x = np.array([float(valores_x[e]) for e in scenario.var_labels])
        y = np.array([float(valores_y.get(e, 0.0)) for e in scenario.capacity_labels])
    except (OSError, ValueError, KeyError, TypeError, AttributeError) as exc:
        raise ParameterError(f'estado inicial ilegible en {ruta}: {exc}') from exc
    desconocidas = set(valores_x) - set(scenario.var_labels) | set(valores_y) - set(scenario.capacity_labels)
    if desconocidas:
        raise ParameterError(f'estado inicial con etiquetas desconocidas: {", ".join(sorted(desconocidas))}')
    estado = SystemState(x, y)
    problemas = state_violations(estado, scenario)
    if problemas:
        raise ParameterError('estado inicial inválido: ' + '; '.join(problemas))
    return estado


@dataclass
class ResultadoMetodo:
    method: str
    cost_exact: float
    wardrop_gap: float
    exit_code: int
    files: list[Path]


def _trayectoria_oraculo(solucion, scenario, sp) -> Trajectory:
    trayectoria = Trajectory(method='oracle')
    trayectoria.add(0.0, solucion.x, juego_desacoplado(scenario, solucion.y, sp), scenario, phase=0)
    return trayectoria


def _resumen_equilibrio(estado, scenario, sp, tol):
    informe = wardrop_check(estado, scenario, sp, tol)
    kkt = kkt_check(estado, scenario, sp, tol)
    rate, cota = bnn_lyapunov_rate(estado, scenario, sp)
    return informe, {
        'equilibrium': informe.as_dict(),
        'kkt': asdict(kkt) | {'maximum': kkt.maximum, 'passed': kkt.passed},
        'lyapunov_rate': {'rate': rate, 'bound': cota},
        'capacity_kkt_residual': capacity_kkt_residual(estado, scenario, sp),
    }


def ejecutar_metodo(metodo: str, run_config: RunConfig, scenario, hash_escenario: str) -> ResultadoMetodo:
    """Corre un método, escribe su trayectoria y resumen y registra la ejecución."""
    sp, bnn, ctrl, tol = run_config.sp, run_config.bnn, run_config.ctrl, run_config.tol
    inicial = leer_estado_inicial(run_config.initial_state, scenario) if run_config.initial_state else None
    inicio = time.perf_counter()
    resumen = {}

    if metodo == 'dd':
        estado, trayectoria, _ = run_decoupled(scenario, sp, bnn, ctrl, initial=inicial, tol=tol)
        oraculo = solve_optimal(scenario, sp)
        resumen['oracle_cost'] = oraculo.cost
        resumen['gap_to_oracle'] = (trayectoria.final.cost_exact - oraculo.cost) / max(abs(oraculo.cost), 1e-12)
        resumen['phases'] = [asdict(f) for f in trayectoria.phases]
        resumen['flagged_phases'] = trayectoria.flagged_phases()
        resumen['small_descent_violations'] = len(trayectoria.small_descent_violations())
        resumen['large_descent_violations'] = len(trayectoria.large_descent_violations())
    elif metodo == 'cd':
        x, trayectoria, _ = run_coupled(scenario, sp, bnn, ctrl.n_large, tol,
                                        x0=None if inicial is None else inicial.x)
        estado = SystemState(x, trayectoria.final.y)
    elif metodo == 'nocoding':
        x, _, trayectoria, _ = run_no_coding(scenario, bnn, ctrl.n_large, tol,
                                             x0=None if inicial is None else inicial.x)
        estado = SystemState(x, trayectoria.final.y)
    elif metodo == 'oracle':
        solucion = solve_optimal(scenario, sp)
        estado = solucion.state
        trayectoria = _trayectoria_oraculo(solucion, scenario, sp)
        resumen['lp'] = {'iterations': solucion.iterations, 'residual': solucion.residual,
                         'value': solucion.lp_value, 'polished': solucion.polished}
        resumen['optimality_certificate'] = optimality_certificate(solucion, scenario)
        resumen['smoothed_optimum'] = {
            str(r): valor for r, (valor, _) in smoothed_optimum(scenario, VALORES_R_SUAVIZADOS, solucion).items()
        }
    else:
        raise ParameterError(f'método desconocido: {metodo}')

    final = trayectoria.final
    if metodo in ('dd', 'oracle'):
        informe, equilibrio = _resumen_equilibrio(estado, scenario, sp, tol)
        brecha = informe.wardrop_gap if metodo == 'oracle' else final.wardrop_gap
        paso = informe.passed
    else:
        brecha = final.wardrop_gap
        paso = brecha <= tol
        equilibrio = {}
    codigo = EXITO if paso else SIN_CONVERGENCIA
    duracion = time.perf_counter() - inicio

    run_config.out.mkdir(parents=True, exist_ok=True)
    ruta_csv = escribir_trayectoria(run_config.out / f'trayectoria_{metodo}.csv', trayectoria, scenario)
    resumen = {
        'method': metodo,
        'cost_exact': final.cost_exact if metodo != 'oracle' else exact_total_cost(estado, scenario),
        'cost_smoothed': smoothed_total_cost(estado, scenario, sp),
        'wardrop_gap': brecha,
        'converged': paso,
        'x': etiquetar(estado.x, scenario.var_labels),
        'y': etiquetar(estado.y, scenario.capacity_labels),
        'mass_error': trayectoria.mass_errors(scenario),
        'runtime_s': duracion,
        **resumen,
        **equilibrio,
        'provenance': procedencia(hash_escenario, metodo, run_config.params_echo()),
    }
    ruta_json = escribir_json(run_config.out / f'resumen_{metodo}.json', resumen)

    Ejecucion.registrar(
        metodo=metodo, hash_escenario=hash_escenario, parametros=run_config.params_echo(),
        costo_exacto=resumen['cost_exact'], brecha_wardrop=brecha, codigo_salida=codigo,
        directorio_salida=run_config.out, version=version_compilacion(), duracion=duracion,
    )
    logger.info('Corrida %s: costo exacto %.6f, brecha %.4g, código %d',
                metodo, resumen['cost_exact'], brecha, codigo)
    return ResultadoMetodo(metodo, resumen['cost_exact'], brecha, codigo, [ruta_csv, ruta_json])


def ejecutar_run(run_config: RunConfig, config) -> list[ResultadoMetodo]:
    scenario = resolve(config)
    hash_escenario = scenario_hash(config)
    metodos = METODOS_INDIVIDUALES if run_config.method == 'all' else (run_config.method,)
    return [ejecutar_metodo(m, run_config, scenario, hash_escenario) for m in metodos]


def ejecutar_comparacion(run_config: RunConfig, config):
    scenario = resolve(config)
    hash_escenario = scenario_hash(config)
    inicio = time.perf_counter()
    informe = compare_report(scenario, run_config.sp, run_config.bnn, run_config.ctrl, run_config.tol)
    duracion = time.perf_counter() - inicio

    run_config.out.mkdir(parents=True, exist_ok=True)
    extra = {
        'runtime_s': duracion,
        'provenance': procedencia(hash_escenario, 'compare', run_config.params_echo()),
    }
    archivos = list(escribir_comparacion(run_config.out, informe, scenario, extra))
    archivos.append(escribir_series(run_config.out / 'series_costos.csv', informe))
    Ejecucion.registrar(
        metodo='compare', hash_escenario=hash_escenario, parametros=run_config.params_echo(),
        costo_exacto=informe.rows['dd'].cost_exact, brecha_wardrop=informe.rows['dd'].wardrop_gap,
        codigo_salida=EXITO if informe.passed else SIN_CONVERGENCIA,
        directorio_salida=run_config.out, version=version_compilacion(), duracion=duracion,
    )
    return informe, archivos, duracion


def estado_aleatorio(scenario, rng: np.random.Generator) -> SystemState:
    """Estado interior: divisiones de Dirichlet y capacidades del orden de las cargas."""
    x = np.empty(scenario.n_vars)
    for k, flujo in enumerate(scenario.flows):
        inicio = int(scenario.starts[k])
        x[inicio:inicio + len(flujo.paths)] = flujo.load * rng.dirichlet(np.ones(len(flujo.paths)))
    escala = float(scenario.loads.mean()) if scenario.loads.size else 1.0
    y = rng.uniform(0.2, 1.2, size=scenario.n_hyperlinks) * escala
    return SystemState(x, y)


def chequear_gradientes(scenario, sp: SmoothingParams, muestras: int = 100, seed: int = 0,
                        h_step: float = 1e-6) -> dict:
    """Peor error relativo de pagos y derivadas de capacidad sobre estados aleatorios."""
    rng = np.random.default_rng(seed)
    peor_x = peor_y = 0.0
    for _ in range(muestras):
        reporte = gradient_check(estado_aleatorio(scenario, rng), scenario, sp, h_step)
        if reporte.skipped:
            return {'skipped': True, 'r': sp.r, 'payoff_error': None, 'capacity_error': None}
        peor_x = max(peor_x, reporte.payoff_error)
        peor_y = max(peor_y, reporte.capacity_error)
    return {'skipped': False, 'r': sp.r, 'samples': muestras, 'payoff_error': peor_x, 'capacity_error': peor_y}


@contextmanager
def traducir_errores():
    """Convierte las excepciones de dominio en CommandError con su código de salida."""
    try:
        yield
    except ScenarioParseError as exc:
        raise CommandError(f'Error de formato: {exc}', returncode=ERROR_FORMATO) from exc
    except InvalidScenarioError as exc:
        listado = '\n'.join(f'  - {v}' for v in exc.violations)
        raise CommandError(f'Escenario inválido:\n{listado}', returncode=ESCENARIO_INVALIDO) from exc
    except (ParameterError, DegenerateFlowError) as exc:
        raise CommandError(f'Parámetro inválido: {exc}', returncode=ERROR_FORMATO) from exc
    except (NonFiniteCostError, LinearProgramError) as exc:
        raise CommandError(str(exc), returncode=SIN_CONVERGENCIA) from exc
    except StructuralError as exc:
        raise CommandError(f'Escenario inválido: {exc}', returncode=ESCENARIO_INVALIDO) from exc
