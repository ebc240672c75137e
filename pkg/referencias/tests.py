import logging
import time

import numpy as np
from django.test import SimpleTestCase

from costos.modelo import SmoothingParams, SystemState, exact_total_cost
from dinamica.bnn import BnnParams
from dinamica.control import ControllerParams
from dinamica.desacoplada import run_decoupled
from dinamica.equilibrio import wardrop_check
from topologia.escenarios import reference_scenario
from topologia.generador import generate_random_scenario
from topologia.red import (
    Flow, Link, Network, Node, PhysicalPath, ScenarioConfig, build_scenario, detect_hyperlinks, resolve,
)

from .comparacion import compare_report
from .oraculo import (
    intervalo_optimo, optimality_certificate, proyectar_simplex, smoothed_optimum, solve_optimal,
    verify_optimum_grid,
)
from .simplex import LinearProgramError, simplex_bland
from .sistemas import run_coupled, run_no_coding

logger = logging.getLogger(__name__)

X_OPTIMO = np.array([2.69, 2.04, 2.69, 0.0, 0.0, 3.56])
CON_RETROCESO = ControllerParams(backtracking=True)


def corredor_aleatorio(semilla):
    """Dos flujos opuestos con dos caminos cada uno y costos y cargas al azar."""
    rng = np.random.default_rng(semilla)
    costos = np.round(rng.uniform(1.0, 3.0, size=5), 2)
    enlaces = (('n1', 'n2'), ('n2', 'n3'), ('n3', 'n4'), ('n1', 'n5'), ('n5', 'n4'))
    cargas = np.round(rng.uniform(1.0, 5.0, size=2), 2)
    ida = (('n1', 'n2', 'n3', 'n4'), ('n1', 'n5', 'n4'))
    config = ScenarioConfig(
        network=Network(
            nodes=tuple(Node(f'n{k}') for k in range(1, 6)),
            links=tuple(Link(a, b, float(c)) for (a, b), c in zip(enlaces, costos)),
            symmetric=True,
        ),
        flows=(
            Flow(1, 'n1', 'n4', float(cargas[0]), tuple(PhysicalPath(c) for c in ida)),
            Flow(2, 'n4', 'n1', float(cargas[1]), tuple(PhysicalPath(tuple(reversed(c))) for c in ida)),
        ),
    )
    return resolve(config)


def sin_codificacion():
    """Flujos de un solo camino que nunca se cruzan en sentidos opuestos."""
    nodos = ('a', 'b', 'c', 'd')
    config = ScenarioConfig(
        network=Network(
            nodes=tuple(Node(n) for n in nodos),
            links=(Link('a', 'b', 1.5), Link('b', 'c', 2.0), Link('c', 'd', 0.5)),
        ),
        flows=(
            Flow(1, 'a', 'c', 2.0, (PhysicalPath(('a', 'b', 'c')),)),
            Flow(2, 'b', 'd', 3.0, (PhysicalPath(('b', 'c', 'd')),)),
        ),
    )
    return resolve(config)


class SimplexTests(SimpleTestCase):
    def test_programa_pequeno(self):
        # min -x1 - 2 x2  con  x1 + x2 + s = 4,  x2 + t = 3
        A = np.array([[1.0, 1.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0]])
        resultado = simplex_bland(A, np.array([4.0, 3.0]), np.array([-1.0, -2.0, 0.0, 0.0]))
        np.testing.assert_allclose(resultado.z[:2], [1.0, 3.0], atol=1e-12)
        self.assertAlmostEqual(resultado.valor, -7.0)

    def test_infactible(self):
        A = np.array([[1.0, 1.0], [1.0, 1.0]])
        with self.assertRaises(LinearProgramError):
            simplex_bland(A, np.array([1.0, 2.0]), np.zeros(2))

    def test_no_acotado(self):
        A = np.array([[1.0, -1.0]])
        with self.assertRaises(LinearProgramError):
            simplex_bland(A, np.array([1.0]), np.array([0.0, -1.0]))


class OraculoTests(SimpleTestCase):
    def setUp(self):
        self.escenario = resolve(reference_scenario())

    def test_optimo_del_escenario_de_referencia(self):
        solucion = solve_optimal(self.escenario)
        np.testing.assert_allclose(solucion.x, X_OPTIMO, atol=1e-2)
        self.assertAlmostEqual(solucion.cost, 50.685, places=6)
        self.assertAlmostEqual(solucion.cost, exact_total_cost(SystemState(X_OPTIMO, solucion.y), self.escenario),
                               places=6)
        self.assertAlmostEqual(solucion.lp_value, solucion.cost, places=6)
        self.assertLessEqual(solucion.residual, 1e-9)

    def test_capacidades_pulidas_en_equilibrio(self):
        solucion = solve_optimal(self.escenario, SmoothingParams(r=-100.0))
        self.assertTrue(solucion.polished)
        self.assertGreaterEqual(solucion.y[0], 2.04 - 1e-9)
        self.assertLessEqual(solucion.y[0], 3.56 + 1e-9)
        self.assertTrue(wardrop_check(solucion.state, self.escenario, SmoothingParams(r=-100.0), tol=0.05).passed)

    def test_pulido_no_cambia_el_costo(self):
        crudo = solve_optimal(self.escenario, polish=False)
        pulido = solve_optimal(self.escenario)
        self.assertFalse(crudo.polished)
        self.assertAlmostEqual(crudo.cost, pulido.cost, places=9)

    def test_intervalo_de_capacidades_optimas(self):
        self.assertEqual(intervalo_optimo(2.04, 3.56, 1.3, 2.8), (2.04, 3.56))
        self.assertEqual(intervalo_optimo(2.69, 2.69, 1.8, 1.6), (2.69, 2.69))
        self.assertEqual(intervalo_optimo(0.0, 3.0, 2.0, 1.0), (0.0, 0.0))
        self.assertEqual(intervalo_optimo(0.0, 3.0, 1.0, 2.0), (0.0, 3.0))

    def test_cargas_nulas(self):
        config = reference_scenario()
        flujos = tuple(Flow(f.id, f.source, f.dest, 0.0, f.paths) for f in config.flows)
        escenario = build_scenario(config.network, flujos, detect_hyperlinks(config.network, flujos))
        solucion = solve_optimal(escenario)
        self.assertEqual(solucion.cost, 0.0)
        np.testing.assert_array_equal(solucion.x, np.zeros(6))
        np.testing.assert_allclose(solucion.y, np.zeros(2), atol=1e-12)

    def test_certificado_de_optimalidad(self):
        solucion = solve_optimal(self.escenario)
        self.assertLessEqual(optimality_certificate(solucion, self.escenario, delta=1e-4), 1e-8)

    def test_simplex_coincide_con_la_rejilla(self):
        for semilla in range(3):
            escenario = corredor_aleatorio(semilla)
            self.assertEqual(escenario.n_hyperlinks, 3)
            solucion = solve_optimal(escenario, polish=False)
            costo_rejilla, _ = verify_optimum_grid(escenario)
            self.assertLessEqual(abs(solucion.cost - costo_rejilla) / abs(costo_rejilla), 1e-3, f'semilla {semilla}')
            self.assertLessEqual(solucion.cost, costo_rejilla + 1e-8)

    def test_rejilla_limitada_a_instancias_pequenas(self):
        with self.assertRaises(ValueError):
            verify_optimum_grid(resolve(generate_random_scenario(1)))

    def test_optimo_suavizado_monotono(self):
        solucion = solve_optimal(self.escenario)
        valores = smoothed_optimum(self.escenario, (-10.0, -50.0, -100.0))
        self.assertLessEqual(valores[-10.0][0], valores[-50.0][0] + 1e-9)
        self.assertLessEqual(valores[-50.0][0], valores[-100.0][0] + 1e-9)
        self.assertLessEqual(valores[-100.0][0], solucion.cost + 1e-9)
        self.assertLess((solucion.cost - valores[-100.0][0]) / solucion.cost, 0.01)

    def test_proyeccion_al_simplex(self):
        proyectado = proyectar_simplex(np.array([3.0, -1.0, 0.5]), 2.0)
        np.testing.assert_allclose(proyectado, [2.0, 0.0, 0.0])
        np.testing.assert_allclose(proyectar_simplex(np.array([1.0, 1.0]), 2.0), [1.0, 1.0])


class SistemasTests(SimpleTestCase):
    def setUp(self):
        self.escenario = resolve(reference_scenario())

    def test_sin_codificacion_en_referencia(self):
        x, costo, trayectoria, _ = run_no_coding(self.escenario)
        self.assertAlmostEqual(costo, 57.641, places=6)
        self.assertAlmostEqual(x[5], 3.56, places=9)
        self.assertEqual(x[4], 0.0)
        self.assertAlmostEqual(x[0] + x[1], 4.73, places=9)
        self.assertAlmostEqual(trayectoria.final.cost_exact, costo)

    def test_camino_unico_lleva_toda_la_carga(self):
        escenario = sin_codificacion()
        x, costo, _, _ = run_no_coding(escenario)
        np.testing.assert_allclose(x, [2.0, 3.0])
        self.assertAlmostEqual(costo, 2.0 * 3.5 + 3.0 * 2.5)

    def test_acoplado_con_un_flujo_es_sin_codificacion(self):
        config = reference_scenario()
        escenario = resolve(ScenarioConfig(network=config.network, flows=config.flows[:1]))
        x_acoplado, _, _ = run_coupled(escenario, n_large=10)
        _, _, trayectoria, _ = run_no_coding(escenario, n_large=10)
        np.testing.assert_allclose(x_acoplado, trayectoria.records[-2].x, rtol=1e-12)

    def test_acoplado_entre_optimo_y_sin_codificacion(self):
        x, trayectoria, _ = run_coupled(self.escenario)
        self.assertGreaterEqual(trayectoria.final.cost_exact, 50.685 - 1e-6)
        self.assertLessEqual(trayectoria.final.cost_exact, 57.641 + 1e-6)
        np.testing.assert_allclose(self.escenario.flow_sums(x), self.escenario.loads, rtol=1e-12)


class ComparacionTests(SimpleTestCase):
    def test_orden_en_escenario_de_referencia(self):
        informe = compare_report(resolve(reference_scenario()), ctrl=CON_RETROCESO)
        self.assertEqual(list(informe.rows), ['oracle', 'dd', 'cd', 'nocoding'])
        self.assertTrue(informe.passed, [c.name for c in informe.checks if not c.passed])
        self.assertAlmostEqual(informe.rows['nocoding'].cost_exact, 57.641, places=6)
        self.assertAlmostEqual(informe.rows['oracle'].cost_exact, 50.685, places=6)
        self.assertTrue(np.isfinite(informe.dd_minus_cd))
        self.assertEqual(len(informe.rows['dd'].series), 50)

        # potencial acoplado convexo: CD alcanza su mínimo y queda por debajo de DD
        cd = informe.rows['cd']
        self.assertAlmostEqual(cd.cost_exact, 50.8004, delta=1e-3)
        np.testing.assert_allclose(cd.x[:2], [2.506, 2.224], atol=1e-2)
        self.assertGreater(informe.dd_minus_cd, 0.0)
        self.assertLess(informe.dd_minus_cd, 0.05)
        self.assertLess(informe.rows['oracle'].cost_exact, cd.cost_exact)
        self.assertLess(informe.rows['dd'].cost_exact, informe.rows['nocoding'].cost_exact)

    def test_sin_codificacion_todos_iguales(self):
        informe = compare_report(sin_codificacion(), ctrl=ControllerParams(n_large=5))
        costos = [fila.cost_exact for fila in informe.rows.values()]
        for costo in costos:
            self.assertAlmostEqual(costo, 14.5, places=9)
        self.assertTrue(informe.passed)

    def test_instancias_aleatorias_de_treinta_nodos(self):
        sp, bnn, ctrl = SmoothingParams(), BnnParams(), CON_RETROCESO
        brechas = {}
        inicio = time.perf_counter()
        for semilla in range(10):
            escenario = resolve(generate_random_scenario(semilla))
            optimo = solve_optimal(escenario, sp, polish=False)
            _, trayectoria, _ = run_decoupled(escenario, sp, bnn, ctrl)
            _, costo_sin_codificar, _, _ = run_no_coding(escenario, bnn, ctrl.n_large)
            costo = trayectoria.final.cost_exact
            self.assertLessEqual(costo, costo_sin_codificar + 1e-6, f'semilla {semilla}')
            self.assertGreaterEqual(costo, optimo.cost - 1e-6, f'semilla {semilla}')
            brechas[semilla] = (costo - optimo.cost) / optimo.cost
        logger.info('Brecha DD contra el óptimo por semilla: %s (%.1f s)',
                    ', '.join(f'{s}: {b:.4%}' for s, b in brechas.items()), time.perf_counter() - inicio)
        self.assertEqual(len(brechas), 10)
