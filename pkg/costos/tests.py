import numpy as np
from django.test import SimpleTestCase

from topologia.escenarios import reference_scenario
from topologia.red import Flow, HyperSide, HyperLink, Link, Network, Node, PhysicalPath, ScenarioConfig, resolve

from .modelo import (
    ParameterError, SmoothingParams, SystemState, coupled_exact_cost, exact_rebate,
    exact_total_cost, gradient_check, payoffs, r_mean, rebate_grad_y, smoothed_rebate,
    smoothed_total_cost, state_violations,
)

# Estado óptimo del programa lineal en el escenario de referencia
X_OPTIMO = np.array([2.69, 2.04, 2.69, 0.0, 0.0, 3.56])
Y_OPTIMO = np.array([3.56, 2.69])


def hiperenlace(alfa_a, alfa_b):
    return HyperLink(1, 'n2', HyperSide(1, 1, 'n3', alfa_a), HyperSide(2, 1, 'n1', alfa_b))


def estado_interior(escenario, rng):
    x = np.concatenate([
        f.load * rng.dirichlet(np.ones(len(f.paths))) for f in escenario.flows
    ])
    y = rng.uniform(0.5, 4.0, size=escenario.n_hyperlinks)
    return SystemState(x, y)


class MediaRTests(SimpleTestCase):
    def test_valores_iguales(self):
        for r in (-1.0, -8.0, -100.0):
            self.assertAlmostEqual(r_mean((3.7, 3.7), r), 3.7)

    def test_forma_cerrada(self):
        self.assertAlmostEqual(r_mean((1.0, 2.0), -100.0), 2 ** (1 / 100), places=12)

    def test_cero_anula_la_media(self):
        self.assertEqual(r_mean((0.0, 5.0), -100.0), 0.0)

    def test_exponentes_grandes_sin_desborde(self):
        self.assertTrue(np.isfinite(r_mean((1e-6, 1e6), -1000.0)))

    def test_r_no_negativo(self):
        with self.assertRaises(ParameterError):
            r_mean((1.0, 2.0), 0.0)
        with self.assertRaises(ParameterError):
            SmoothingParams(r=1.0)
        with self.assertRaises(ParameterError):
            SmoothingParams(floor=0.0)

    def test_acotada_entre_minimo_y_minimo_escalado(self):
        rng = np.random.default_rng(5)
        a, b = rng.uniform(1e-3, 10.0, size=(2, 10_000))
        minimo = np.minimum(a, b)
        for r in (-10.0, -50.0, -100.0):
            media = r_mean((a, b), r)
            self.assertTrue(np.all(media >= minimo * (1 - 1e-12)))
            self.assertTrue(np.all(media <= minimo * 2 ** (-1 / r) * (1 + 1e-12)))


class RebajasTests(SimpleTestCase):
    def test_rebaja_exacta(self):
        self.assertAlmostEqual(exact_rebate(hiperenlace(1.3, 2.8), 2.04, 3.56, 3.56), 2.652)
        self.assertEqual(exact_rebate(hiperenlace(1.3, 2.8), 0.0, 0.0, 0.0), 0.0)
        self.assertAlmostEqual(exact_rebate(hiperenlace(1.0, 1.0), 0.0, 1.0, 2.0), -1.0)

    def test_rebaja_suavizada(self):
        sp = SmoothingParams(r=-100.0)
        h = hiperenlace(1.3, 2.8)
        self.assertEqual(smoothed_rebate(h, 2.0, 3.0, 0.0, sp), 0.0)
        self.assertAlmostEqual(smoothed_rebate(h, 1.0, 1.0, 1.0, sp), 1.3)

    def test_rebaja_suavizada_cerca_de_la_exacta(self):
        sp = SmoothingParams(r=-100.0)
        h = hiperenlace(1.3, 2.8)
        y = 3.56
        diferencia = abs(smoothed_rebate(h, 2.04, 3.56, y, sp) - exact_rebate(h, 2.04, 3.56, y))
        self.assertLessEqual(diferencia, (1.3 + 2.8) * y * (2 ** (1 / 100) - 1))

    def test_derivada_de_capacidad(self):
        sp = SmoothingParams(r=-100.0)
        h = hiperenlace(1.3, 2.8)
        self.assertAlmostEqual(rebate_grad_y(h, 1.0, 1.0, 100.0, sp), -2.8, places=6)
        self.assertAlmostEqual(rebate_grad_y(h, 1.0, 1.0, 0.01, sp), 1.3, delta=0.05)
        self.assertAlmostEqual(rebate_grad_y(hiperenlace(2.0, 2.0), 1.5, 1.5, 1.5, sp), 0.0, places=12)


class CostoTotalTests(SimpleTestCase):
    def setUp(self):
        self.escenario = resolve(reference_scenario())

    def test_trafico_nulo(self):
        estado = SystemState(np.zeros(6), np.zeros(2))
        self.assertEqual(exact_total_cost(estado, self.escenario), 0.0)
        self.assertEqual(smoothed_total_cost(estado, self.escenario), 0.0)

    def test_sin_capacidades_es_la_suma_de_betas(self):
        estado = SystemState(X_OPTIMO, np.zeros(2))
        self.assertAlmostEqual(exact_total_cost(estado, self.escenario), 57.641, places=9)
        self.assertAlmostEqual(smoothed_total_cost(estado, self.escenario), 57.641, places=9)

    def test_costo_exacto_en_el_optimo(self):
        estado = SystemState(X_OPTIMO, Y_OPTIMO)
        self.assertAlmostEqual(exact_total_cost(estado, self.escenario), 50.685, places=9)

    def test_suavizado_por_debajo_y_convergente(self):
        estado = SystemState(X_OPTIMO, Y_OPTIMO)
        exacto = exact_total_cost(estado, self.escenario)
        brechas = [exacto - smoothed_total_cost(estado, self.escenario, SmoothingParams(r=r))
                   for r in (-10.0, -50.0, -100.0)]
        self.assertGreater(brechas[0], brechas[1])
        self.assertGreater(brechas[1], brechas[2])
        self.assertGreaterEqual(brechas[2], 0.0)
        self.assertLess(brechas[2] / exacto, 0.01)

    def test_convexidad_en_x_y_en_y(self):
        rng = np.random.default_rng(17)
        sp = SmoothingParams(r=-10.0)
        for _ in range(50):
            u = estado_interior(self.escenario, rng)
            v = estado_interior(self.escenario, rng)
            x_medio = 0.5 * (u.x + v.x)
            izquierda = smoothed_total_cost(u.with_x(x_medio), self.escenario, sp)
            derecha = 0.5 * (smoothed_total_cost(u, self.escenario, sp)
                             + smoothed_total_cost(u.with_x(v.x), self.escenario, sp))
            self.assertLessEqual(izquierda, derecha + 1e-9)

            y_medio = 0.5 * (u.y + v.y)
            izquierda = smoothed_total_cost(u.with_y(y_medio), self.escenario, sp)
            derecha = 0.5 * (smoothed_total_cost(u, self.escenario, sp)
                             + smoothed_total_cost(u.with_y(v.y), self.escenario, sp))
            self.assertLessEqual(izquierda, derecha + 1e-9)

    def test_costo_acoplado_con_capacidad_minima(self):
        x = X_OPTIMO
        y = np.minimum(x[self.escenario.side_a], x[self.escenario.side_b])
        self.assertAlmostEqual(coupled_exact_cost(x, self.escenario),
                               exact_total_cost(SystemState(x, y), self.escenario))

    def test_violaciones_de_estado(self):
        self.assertEqual(state_violations(SystemState(X_OPTIMO, Y_OPTIMO), self.escenario), [])
        mal = X_OPTIMO.copy()
        mal[0] += 1.0
        self.assertEqual(state_violations(SystemState(mal, Y_OPTIMO), self.escenario),
                         ['el flujo 1 suma 5.73 en lugar de 4.73'])
        self.assertIn('Y con componentes negativas',
                      state_violations(SystemState(X_OPTIMO, -Y_OPTIMO), self.escenario))


class PagosTests(SimpleTestCase):
    def setUp(self):
        self.escenario = resolve(reference_scenario())
        self.sp = SmoothingParams(r=-100.0)

    def test_camino_sin_hiperenlaces(self):
        pagos = payoffs(SystemState(X_OPTIMO, Y_OPTIMO), self.escenario, self.sp)
        for k in (3, 4):
            self.assertEqual(pagos[k], self.escenario.beta[k])

    def test_limites_del_descuento(self):
        x = np.array([4.73, 0.0, 2.69, 0.0, 3.56, 0.0])
        x_mucho_mayor = payoffs(SystemState(x, np.array([1e-3, 1e-3])), self.escenario, self.sp)
        self.assertAlmostEqual(x_mucho_mayor[0], 6.2, places=9)

        x = np.array([4.73 - 1e-3, 1e-3, 2.69 - 1e-3, 1e-3, 3.56 - 1e-3, 1e-3])
        x_mucho_menor = payoffs(SystemState(x, np.array([4.0, 4.0])), self.escenario, self.sp)
        # camino 1.2 toca h1 con alfa 1.3; camino 3.2 con alfa 2.8
        self.assertAlmostEqual(x_mucho_menor[1], 6.2 - 1.3 * 2 ** (1 / 100), places=6)
        self.assertAlmostEqual(x_mucho_menor[5], 4.1 - 2.8 * 2 ** (1 / 100), places=6)


class DiferenciasFinitasTests(SimpleTestCase):
    def test_gradientes_en_estados_aleatorios(self):
        escenario = resolve(reference_scenario())
        sp = SmoothingParams(r=-8.0)
        rng = np.random.default_rng(23)
        for _ in range(100):
            reporte = gradient_check(estado_interior(escenario, rng), escenario, sp)
            self.assertFalse(reporte.skipped)
            self.assertLessEqual(reporte.payoff_error, 1e-4)
            self.assertLessEqual(reporte.capacity_error, 1e-4)
            self.assertTrue(reporte.passed())

    def test_camino_lineal_exacto(self):
        config = ScenarioConfig(
            network=Network(nodes=(Node('a'), Node('b'), Node('c')),
                            links=(Link('a', 'b', 1.5), Link('b', 'c', 2.0), Link('a', 'c', 4.0))),
            flows=(Flow(1, 'a', 'c', 2.0, (PhysicalPath(('a', 'b', 'c')), PhysicalPath(('a', 'c')))),),
        )
        escenario = resolve(config)
        reporte = gradient_check(SystemState(np.array([1.2, 0.8]), np.zeros(0)), escenario, SmoothingParams(r=-8.0))
        self.assertLessEqual(reporte.payoff_error, 1e-8)
        self.assertEqual(reporte.capacity_error, 0.0)

    def test_omitido_con_r_muy_negativo(self):
        escenario = resolve(reference_scenario())
        reporte = gradient_check(SystemState(X_OPTIMO, Y_OPTIMO), escenario, SmoothingParams(r=-100.0))
        self.assertTrue(reporte.skipped)
        self.assertTrue(reporte.passed())
