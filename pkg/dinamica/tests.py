import numpy as np
from django.test import SimpleTestCase

from costos.modelo import SmoothingParams, SystemState, exact_total_cost, payoffs, rebate_grad_y
from topologia.escenarios import reference_scenario
from topologia.generador import generate_random_scenario
from topologia.red import Flow, Link, Network, Node, PhysicalPath, ScenarioConfig, resolve

from .bnn import (
    BnnParams, DegenerateFlowError, Juego, bnn_derivative, bnn_lyapunov_rate, bnn_step,
    campo_bnn, juego_desacoplado, juego_sin_codificacion, run_small_timescale,
)
from .control import (
    ControllerParams, capacity_gradient, capacity_gradients, capacity_kkt_residual, capacity_step,
    controller_step, guarded_capacity_step,
)
from .desacoplada import run_decoupled
from .equilibrio import kkt_check, wardrop_check

COSTO_OPTIMO_REFERENCIA = 50.685
X_OPTIMO = np.array([2.69, 2.04, 2.69, 0.0, 0.0, 3.56])
CON_RETROCESO = ControllerParams(backtracking=True)


def flujo_dos_caminos(beta_largo, carga=2.0):
    """Un flujo a->b con un camino directo (beta 2) y otro por c (beta_largo)."""
    mitad = beta_largo / 2
    config = ScenarioConfig(
        network=Network(
            nodes=(Node('a'), Node('b'), Node('c')),
            links=(Link('a', 'b', 2.0), Link('a', 'c', mitad), Link('c', 'b', mitad)),
            symmetric=True,
        ),
        flows=(Flow(1, 'a', 'b', carga, (PhysicalPath(('a', 'b')), PhysicalPath(('a', 'c', 'b')))),),
    )
    return resolve(config)


def corredor_simetrico(carga):
    nodos = ('n1', 'n2', 'n3', 'n4')
    config = ScenarioConfig(
        network=Network(
            nodes=tuple(Node(n) for n in nodos),
            links=tuple(Link(a, b, 1.0) for a, b in zip(nodos, nodos[1:])),
            symmetric=True,
        ),
        flows=(
            Flow(1, 'n1', 'n4', carga, (PhysicalPath(nodos),)),
            Flow(2, 'n4', 'n1', carga, (PhysicalPath(tuple(reversed(nodos))),)),
        ),
    )
    return resolve(config)


def juego_constante(pagos):
    pagos = np.asarray(pagos, dtype=float)
    return Juego(
        nombre='constante',
        potencial=lambda x: float(pagos @ x),
        pagos=lambda x: pagos,
        costo_exacto=lambda x: float(pagos @ x),
        capacidades=lambda x: np.zeros(0),
    )


class CampoBnnTests(SimpleTestCase):
    def setUp(self):
        self.escenario = flujo_dos_caminos(4.0)

    def test_derivada_a_mano(self):
        estado = SystemState(np.array([1.0, 1.0]), np.zeros(0))
        np.testing.assert_allclose(bnn_derivative(1, estado, self.escenario), [1.0, -1.0])

    def test_pagos_iguales_son_estacionarios(self):
        x_punto, gamma = campo_bnn(np.array([0.3, 1.7]), np.array([3.0, 3.0]), self.escenario)
        np.testing.assert_array_equal(x_punto, [0.0, 0.0])
        np.testing.assert_array_equal(gamma, [0.0, 0.0])

    def test_camino_extinto_mas_barato_resurge(self):
        escenario = flujo_dos_caminos(6.0)
        estado = SystemState(np.array([0.0, 2.0]), np.zeros(0))
        np.testing.assert_allclose(bnn_derivative(1, estado, escenario), [8.0, -8.0])
        nuevo = bnn_step(estado.x, juego_sin_codificacion(escenario), escenario, BnnParams(eta=0.05))
        self.assertGreater(nuevo[0], 0.0)

    def test_camino_extinto_con_hiperenlaces(self):
        escenario = resolve(reference_scenario())
        sp = SmoothingParams(r=-8.0)
        x = np.array([2.0, 2.73, 2.69, 0.0, 3.56, 0.0])
        estado = SystemState(x, np.array([2.0, 2.0]))
        pagos = payoffs(estado, escenario, sp)
        self.assertLess(pagos[5], pagos[4])
        self.assertGreater(bnn_derivative(3, estado, escenario, sp)[1], 0.0)

    def test_flujo_sin_masa(self):
        with self.assertRaises(DegenerateFlowError):
            bnn_derivative(1, SystemState(np.zeros(2), np.zeros(0)), self.escenario)

    def test_conservacion_de_masa_del_campo(self):
        escenario = resolve(reference_scenario())
        rng = np.random.default_rng(2)
        sp = SmoothingParams(r=-8.0)
        for _ in range(20):
            x = np.concatenate([f.load * rng.dirichlet(np.ones(len(f.paths))) for f in escenario.flows])
            estado = SystemState(x, rng.uniform(0.0, 4.0, size=2))
            for flujo in escenario.flows:
                self.assertAlmostEqual(bnn_derivative(flujo.id, estado, escenario, sp).sum(), 0.0, places=12)


class PasoBnnTests(SimpleTestCase):
    def setUp(self):
        self.escenario = flujo_dos_caminos(4.0)

    def test_paso_de_euler(self):
        x = bnn_step(np.array([1.0, 1.0]), juego_sin_codificacion(self.escenario), self.escenario, BnnParams(eta=0.1))
        np.testing.assert_allclose(x, [1.1, 0.9])

    def test_estado_estacionario(self):
        x = np.array([0.4, 1.6])
        nuevo = bnn_step(x, juego_constante([5.0, 5.0]), self.escenario, BnnParams(eta=0.5))
        np.testing.assert_array_equal(nuevo, x)

    def test_recorte_y_renormalizacion(self):
        nuevo = bnn_step(np.array([0.01, 1.99]), juego_constante([100.0, 0.0]), self.escenario, BnnParams(eta=3.0))
        self.assertEqual(nuevo[0], 0.0)
        self.assertAlmostEqual(nuevo[1], 2.0, places=12)

    def test_fase_corta_desciende(self):
        escenario = resolve(reference_scenario())
        juego = juego_desacoplado(escenario, np.array([2.0, 2.0]), SmoothingParams())
        x, pasos = run_small_timescale(escenario.uniform_split(), juego, escenario, BnnParams(eta=0.5, n_small=40))
        valores = [juego.potencial(escenario.uniform_split())] + [p.potencial for p in pasos]
        for previo, actual in zip(valores, valores[1:]):
            self.assertLessEqual(actual, previo + 1e-12)
        self.assertEqual(len(pasos), 40)
        np.testing.assert_allclose(escenario.flow_sums(x), escenario.loads, rtol=1e-12)

    def test_tasa_de_lyapunov(self):
        escenario = resolve(reference_scenario())
        rng = np.random.default_rng(9)
        sp = SmoothingParams(r=-8.0)
        for _ in range(20):
            x = np.concatenate([f.load * rng.dirichlet(np.ones(len(f.paths))) for f in escenario.flows])
            tasa, cota = bnn_lyapunov_rate(SystemState(x, rng.uniform(0.0, 4.0, size=2)), escenario, sp)
            self.assertLessEqual(tasa, 1e-12)
            self.assertAlmostEqual(tasa, cota, delta=1e-9 * max(1.0, abs(cota)))


class ControlTests(SimpleTestCase):
    def setUp(self):
        self.ctrl = ControllerParams(kappa=0.5, step=1.0)

    def test_gradiente_cero_conserva_y(self):
        y = np.array([1.0, 2.5])
        np.testing.assert_array_equal(capacity_step(y, np.zeros(2), self.ctrl), y)

    def test_capacidad_extinta_resucita(self):
        self.assertGreater(capacity_step(np.array([0.0]), np.array([-1.3]), self.ctrl)[0], 0.0)

    def test_capacidad_no_negativa(self):
        self.assertEqual(capacity_step(np.array([0.1]), np.array([5.0]), self.ctrl)[0], 0.0)

    def test_gradiente_con_signo_invertido(self):
        escenario = resolve(reference_scenario())
        estado = SystemState(X_OPTIMO, np.array([50.0, 2.69]))
        h1 = escenario.hyperlinks[0]
        esperado = -rebate_grad_y(h1, 2.04, 3.56, 50.0)
        self.assertAlmostEqual(capacity_gradient(h1, estado, escenario), esperado)
        self.assertAlmostEqual(esperado, h1.alpha_max, places=6)

    def test_paso_del_controlador_segun_retroceso(self):
        escenario = resolve(reference_scenario())
        estado = SystemState(X_OPTIMO, np.array([0.5, 4.0]))
        sp = SmoothingParams()
        plano = controller_step(estado, escenario, sp, self.ctrl)
        np.testing.assert_array_equal(plano, capacity_step(estado.y, capacity_gradients(estado, escenario, sp), self.ctrl))
        con_retroceso = ControllerParams(kappa=0.5, step=1.0, backtracking=True)
        np.testing.assert_array_equal(controller_step(estado, escenario, sp, con_retroceso),
                                      guarded_capacity_step(estado, escenario, sp, con_retroceso))

    def test_capacidad_grande_baja(self):
        escenario = corredor_simetrico(1.0)
        estado = SystemState(np.array([1.0, 1.0]), np.array([20.0, 20.0]))
        nuevo = guarded_capacity_step(estado, escenario, SmoothingParams(), self.ctrl)
        np.testing.assert_allclose(20.0 - nuevo, [0.5, 0.5], atol=1e-6)


class DinamicaDesacopladaTests(SimpleTestCase):
    def test_escenario_de_referencia_cerca_del_optimo(self):
        escenario = resolve(reference_scenario())
        estado, trayectoria, _ = run_decoupled(escenario, ctrl=CON_RETROCESO)
        costo = exact_total_cost(estado, escenario)
        self.assertAlmostEqual(trayectoria.final.cost_exact, costo)
        self.assertLessEqual(abs(costo - COSTO_OPTIMO_REFERENCIA) / COSTO_OPTIMO_REFERENCIA, 0.02)
        self.assertGreaterEqual(costo, COSTO_OPTIMO_REFERENCIA - 1e-3)
        self.assertEqual(len(trayectoria.phases), 50)
        self.assertEqual(len(trayectoria.records), 1 + 50 * 20)

    def test_descenso_con_retroceso_de_capacidades(self):
        escenario = resolve(reference_scenario())
        _, trayectoria, _ = run_decoupled(escenario, ctrl=CON_RETROCESO)
        self.assertEqual(trayectoria.small_descent_violations(), [])
        for previa, siguiente in zip(trayectoria.phases, trayectoria.phases[1:]):
            self.assertLessEqual(siguiente.H, previa.H + 1e-9)
            self.assertAlmostEqual(siguiente.V, 0.5 * siguiente.H)

    def test_controlador_sin_retroceso_en_referencia(self):
        escenario = resolve(reference_scenario())
        _, trayectoria, _ = run_decoupled(escenario)
        self.assertEqual(trayectoria.small_descent_violations(), [])
        self.assertLessEqual(trayectoria.mass_errors(escenario), 1e-12)
        for registro in trayectoria.records:
            self.assertTrue(np.all(registro.x >= 0))
            self.assertTrue(np.all(registro.y >= 0))
        # con kappa * step = 0.5 y r = -100 las capacidades oscilan alrededor de los quiebres
        aumentos = [b.H - a.H for a, b in zip(trayectoria.phases, trayectoria.phases[1:])]
        self.assertGreater(max(aumentos), 0.1)

    def test_descenso_entre_pasos_largos_con_el_controlador_plano(self):
        escenario = corredor_simetrico(1.0)
        ctrl = ControllerParams(kappa=0.5, step=0.1, n_large=60)
        estado, trayectoria, _ = run_decoupled(escenario, SmoothingParams(r=-8.0), ctrl=ctrl)
        self.assertEqual(trayectoria.flagged_phases(), [])
        self.assertEqual(trayectoria.large_descent_violations(rel_slack=1e-6), [])
        self.assertLess(trayectoria.phases[-1].H, trayectoria.phases[0].H)
        np.testing.assert_allclose(estado.y, [1.0, 1.0], atol=1e-3)

    def test_masa_y_signo_en_toda_la_trayectoria(self):
        escenario = resolve(reference_scenario())
        _, trayectoria, _ = run_decoupled(escenario, ctrl=CON_RETROCESO)
        self.assertLessEqual(trayectoria.mass_errors(escenario), 1e-12)
        for registro in trayectoria.records:
            self.assertTrue(np.all(registro.x >= 0))
            self.assertTrue(np.all(registro.y >= 0))

    def test_tiempo_avanza_con_el_eta_aceptado(self):
        escenario = resolve(reference_scenario())
        _, trayectoria, _ = run_decoupled(escenario, ctrl=ControllerParams(n_large=3))
        tiempos = [registro.t for registro in trayectoria.records]
        self.assertEqual(tiempos[0], 0.0)
        for previo, actual in zip(tiempos, tiempos[1:]):
            self.assertGreaterEqual(actual, previo)
            self.assertLessEqual(actual - previo, BnnParams().eta + 1e-15)

    def test_trayectoria_identica_bit_a_bit(self):
        escenario = resolve(reference_scenario())
        ctrl = ControllerParams(n_large=5)
        _, primera, _ = run_decoupled(escenario, ctrl=ctrl)
        _, segunda, _ = run_decoupled(escenario, ctrl=ctrl)
        self.assertEqual(len(primera.records), len(segunda.records))
        for a, b in zip(primera.records, segunda.records):
            np.testing.assert_array_equal(a.x, b.x)
            np.testing.assert_array_equal(a.y, b.y)
            self.assertEqual((a.t, a.cost_exact, a.cost_smoothed, a.wardrop_gap, a.mean_payoffs, a.phase),
                             (b.t, b.cost_exact, b.cost_smoothed, b.wardrop_gap, b.mean_payoffs, b.phase))
        self.assertEqual(primera.phases, segunda.phases)

    def test_descenso_en_escenarios_aleatorios(self):
        for semilla in range(20):
            escenario = resolve(generate_random_scenario(semilla, n_nodes=12, n_flows=4))
            estado, trayectoria, informe = run_decoupled(escenario, ctrl=ControllerParams(n_large=10))
            self.assertEqual(trayectoria.small_descent_violations(slack=1e-9), [], f'semilla {semilla}')
            self.assertLessEqual(trayectoria.mass_errors(escenario), 1e-12)
            if informe.wardrop_gap < 1e-3:
                self.assertTrue(kkt_check(estado, escenario, tol=1e-2).passed, f'semilla {semilla}')

            _, guardada, _ = run_decoupled(escenario, ctrl=ControllerParams(n_large=10, backtracking=True))
            self.assertEqual(guardada.small_descent_violations(slack=1e-9), [], f'semilla {semilla}')
            self.assertEqual(guardada.large_descent_violations(rel_slack=1e-6), [], f'semilla {semilla}')

    def test_un_flujo_sin_hiperenlaces_va_al_camino_mas_barato(self):
        escenario = flujo_dos_caminos(6.0)
        estado, _, _ = run_decoupled(escenario)
        self.assertGreaterEqual(estado.x[0], 0.97 * 2.0)

    def test_corredor_simetrico_capacidad_igual_a_la_carga(self):
        carga = 2.0
        escenario = corredor_simetrico(carga)
        estado, trayectoria, _ = run_decoupled(escenario, ctrl=CON_RETROCESO)
        np.testing.assert_allclose(estado.y, [carga, carga], rtol=0.02)
        self.assertLessEqual(trayectoria.phases[-1].capacity_residual, 0.5)


class EquilibrioTests(SimpleTestCase):
    def setUp(self):
        self.escenario = resolve(reference_scenario())
        self.sp = SmoothingParams(r=-100.0)

    def test_punto_estacionario_cumple(self):
        escenario = flujo_dos_caminos(4.0)
        estado = SystemState(np.array([2.0, 0.0]), np.zeros(0))
        informe = wardrop_check(estado, escenario, self.sp)
        self.assertTrue(informe.passed)
        self.assertEqual(informe.wardrop_gap, 0.0)
        self.assertTrue(kkt_check(estado, escenario, self.sp).passed)

    def test_estado_optimo_con_capacidad_ajustada(self):
        estado = SystemState(X_OPTIMO, np.array([2.056, 2.69]))
        informe = wardrop_check(estado, self.escenario, self.sp, tol=0.05)
        self.assertTrue(informe.passed)
        self.assertEqual(informe.flows[1].used, (True, False))
        self.assertGreater(informe.flows[1].slacks[2], 0.0)
        self.assertTrue(kkt_check(estado, self.escenario, self.sp, tol=0.05).passed)

    def test_capacidad_sin_pulir_del_programa_lineal_falla(self):
        # solo la capacidad pulida (y_1 cerca de 2.056) deja el estado óptimo en equilibrio
        estado = SystemState(X_OPTIMO, np.array([3.56, 2.69]))
        informe = wardrop_check(estado, self.escenario, self.sp, tol=0.05)
        self.assertFalse(informe.passed)
        self.assertGreater(informe.wardrop_gap, 0.3)
        residuos = kkt_check(estado, self.escenario, self.sp, tol=0.05)
        self.assertFalse(residuos.passed)
        self.assertAlmostEqual(residuos.mass, 0.0, places=12)

    def test_tasas_perturbadas_fallan(self):
        x = X_OPTIMO + np.array([0.0, 0.0, 0.0, 0.0, 1.0, -1.0])
        estado = SystemState(x, np.array([2.056, 2.69]))
        informe = wardrop_check(estado, self.escenario, self.sp, tol=0.05)
        self.assertFalse(informe.passed)
        self.assertGreaterEqual(informe.flows[2].gap, 0.4 - 1e-9)
        self.assertEqual(informe.flows[2].used, (True, True))
        self.assertFalse(kkt_check(estado, self.escenario, self.sp, tol=0.05).passed)

    def test_residuo_de_capacidades(self):
        escenario = corredor_simetrico(1.0)
        en_carga = SystemState(np.array([1.0, 1.0]), np.array([1.0, 1.0]))
        self.assertAlmostEqual(capacity_kkt_residual(en_carga, escenario, self.sp), 0.0, places=9)
        en_cero = SystemState(np.array([1.0, 1.0]), np.zeros(2))
        self.assertGreater(capacity_kkt_residual(en_cero, escenario, self.sp), 1.0)
