import csv
import json
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase, override_settings

from costos.modelo import ParameterError, SmoothingParams
from topologia.escenarios import dump_scenario, reference_scenario, serialize_scenario
from topologia.red import ScenarioParams, resolve

from .ejecucion import build_run_config, chequear_gradientes, leer_estado_inicial, validar_opciones
from .forms import RunConfigForm
from .models import Ejecucion
from .salidas import columnas_trayectoria

X_INICIAL = {'x_1_1': 4.0, 'x_1_2': 0.73, 'x_2_1': 1.0, 'x_2_2': 1.69, 'x_3_1': 3.0, 'x_3_2': 0.56}


class ComandoTestCase(TestCase):
    """Base con un directorio temporal y el escenario de referencia escrito en él."""

    def setUp(self):
        temporal = tempfile.TemporaryDirectory()
        self.addCleanup(temporal.cleanup)
        self.dir = Path(temporal.name)
        self.salida = self.dir / 'salida'
        self.escenario = self.dir / 'referencia.json'
        dump_scenario(reference_scenario(), self.escenario)

    def ejecutar(self, *args, **opciones):
        """Corre un comando y devuelve (código de salida, stdout, stderr)."""
        stdout, stderr = StringIO(), StringIO()
        try:
            call_command(*args, stdout=stdout, stderr=stderr, **opciones)
        except CommandError as exc:
            return exc.returncode, stdout.getvalue(), stderr.getvalue() + str(exc)
        return 0, stdout.getvalue(), stderr.getvalue()

    def escribir_json(self, nombre, datos):
        ruta = self.dir / nombre
        ruta.write_text(json.dumps(datos), encoding='utf-8')
        return ruta

    def leer_resumen(self, metodo):
        return json.loads((self.salida / f'resumen_{metodo}.json').read_text(encoding='utf-8'))


class GenerarYValidarTests(ComandoTestCase):
    def test_generar_referencia_y_validar(self):
        ruta = self.dir / 'generado.json'
        codigo, _, _ = self.ejecutar('generate', reference=True, out=str(ruta))
        self.assertEqual(codigo, 0)

        codigo, stdout, _ = self.ejecutar('validate', str(ruta))
        self.assertEqual(codigo, 0)
        self.assertIn('8 nodos, 3 flujos, 6 caminos, 2 hiper-enlaces', stdout)

    def test_generar_aleatorio_a_salida_estandar(self):
        codigo, stdout, _ = self.ejecutar('generate', seed=4, nodes=12, flows=2)
        self.assertEqual(codigo, 0)
        datos = json.loads(stdout)
        self.assertEqual(len(datos['nodes']), 12)
        self.assertEqual(len(datos['flows']), 2)

    def test_generar_con_parametros_imposibles(self):
        codigo, _, _ = self.ejecutar('generate', seed=4, nodes=3)
        self.assertEqual(codigo, 2)

    def test_json_mal_formado(self):
        ruta = self.dir / 'roto.json'
        ruta.write_text('{"nodes": [', encoding='utf-8')
        codigo, _, mensaje = self.ejecutar('validate', str(ruta))
        self.assertEqual(codigo, 2)
        self.assertIn('Error de formato', mensaje)

    def test_nodo_inexistente_en_camino(self):
        datos = serialize_scenario(reference_scenario())
        datos['flows'][0]['paths'][0] = ['n1', 'n2', 'n9', 'n4']
        codigo, _, mensaje = self.ejecutar('validate', str(self.escribir_json('colgante.json', datos)))
        self.assertEqual(codigo, 1)
        self.assertIn('unknown node n9', mensaje)

    def test_run_con_escenario_invalido(self):
        datos = serialize_scenario(reference_scenario())
        datos['links'][0]['cost'] = -2.8
        ruta = self.escribir_json('negativo.json', datos)
        codigo, _, mensaje = self.ejecutar('run', method='nocoding', scenario=str(ruta), out=str(self.salida))
        self.assertEqual(codigo, 1)
        self.assertIn('negative link cost', mensaje)


class RunTests(ComandoTestCase):
    def test_sin_codificacion(self):
        codigo, stdout, _ = self.ejecutar('run', method='nocoding', scenario=str(self.escenario),
                                          out=str(self.salida), n_large=5, n_small=4)
        self.assertEqual(codigo, 0)
        self.assertIn('nocoding: costo exacto 57.641000', stdout)

        resumen = self.leer_resumen('nocoding')
        self.assertAlmostEqual(resumen['cost_exact'], 57.641, places=6)
        self.assertAlmostEqual(resumen['x']['x_3_2'], 3.56, places=9)
        self.assertLessEqual(resumen['mass_error'], 1e-12)
        self.assertEqual(resumen['provenance']['method'], 'nocoding')
        self.assertEqual(resumen['provenance']['params']['n_large'], 5)
        self.assertEqual(len(resumen['provenance']['scenario_sha256']), 64)

        with (self.salida / 'trayectoria_nocoding.csv').open(encoding='utf-8') as archivo:
            filas = list(csv.reader(archivo))
        self.assertEqual(filas[0], columnas_trayectoria(resolve(reference_scenario())))
        # registro inicial, 5 x 4 pasos y el límite proyectado
        self.assertEqual(len(filas) - 1, 1 + 5 * 4 + 1)

    def test_oraculo(self):
        codigo, _, _ = self.ejecutar('run', method='oracle', scenario=str(self.escenario), out=str(self.salida))
        self.assertEqual(codigo, 0)
        resumen = self.leer_resumen('oracle')
        self.assertAlmostEqual(resumen['cost_exact'], 50.685, places=6)
        self.assertTrue(resumen['converged'])
        self.assertTrue(resumen['lp']['polished'])
        self.assertLessEqual(resumen['optimality_certificate'], 1e-8)
        self.assertEqual(set(resumen['smoothed_optimum']), {'-10.0', '-50.0', '-100.0'})
        self.assertLessEqual(resumen['smoothed_optimum']['-100.0'], 50.685 + 1e-9)

    def test_dinamica_desacoplada(self):
        codigo, _, _ = self.ejecutar('run', method='dd', scenario=str(self.escenario), out=str(self.salida))
        resumen = self.leer_resumen('dd')
        self.assertEqual(codigo, 0 if resumen['converged'] else 3)
        self.assertLessEqual(resumen['gap_to_oracle'], 0.02)
        self.assertGreaterEqual(resumen['cost_exact'], resumen['oracle_cost'] - 1e-6)
        self.assertEqual(len(resumen['phases']), 50)
        self.assertEqual(resumen['small_descent_violations'], 0)
        self.assertIn('kkt', resumen)

        ejecucion = Ejecucion.objects.get(metodo='dd')
        self.assertEqual(ejecucion.codigo_salida, codigo)
        self.assertEqual(ejecucion.convergio, codigo == 0)
        self.assertAlmostEqual(ejecucion.costo_exacto, resumen['cost_exact'])

    def test_controlador_sin_retroceso(self):
        codigo, _, _ = self.ejecutar('run', method='dd', scenario=str(self.escenario), out=str(self.salida),
                                     n_large=3, n_small=5, backtracking=False)
        self.assertIn(codigo, (0, 3))
        resumen = self.leer_resumen('dd')
        self.assertFalse(resumen['provenance']['params']['backtracking'])
        self.assertEqual(len(resumen['phases']), 3)
        self.assertEqual(resumen['small_descent_violations'], 0)

    def test_todos_los_metodos(self):
        codigo, _, _ = self.ejecutar('run', method='all', scenario=str(self.escenario), out=str(self.salida),
                                     n_large=5, n_small=4)
        self.assertIn(codigo, (0, 3))
        for metodo in ('dd', 'cd', 'nocoding', 'oracle'):
            self.assertTrue((self.salida / f'resumen_{metodo}.json').is_file(), metodo)
            self.assertTrue((self.salida / f'trayectoria_{metodo}.csv').is_file(), metodo)
        self.assertEqual(Ejecucion.objects.count(), 4)

    def test_escenario_generado_con_semilla(self):
        codigo, _, _ = self.ejecutar('run', method='nocoding', seed=2, out=str(self.salida),
                                     n_large=3, n_small=5)
        self.assertEqual(codigo, 0)
        self.assertEqual(self.leer_resumen('nocoding')['provenance']['params']['seed'], 2)

    def test_r_positivo(self):
        codigo, _, mensaje = self.ejecutar('run', scenario=str(self.escenario), r=1.0, out=str(self.salida))
        self.assertEqual(codigo, 2)
        self.assertIn('r:', mensaje)
        self.assertFalse(Ejecucion.objects.exists())

    def test_sin_escenario_ni_semilla(self):
        codigo, _, _ = self.ejecutar('run', out=str(self.salida))
        self.assertEqual(codigo, 2)

    def test_archivo_de_escenario_inexistente(self):
        codigo, _, _ = self.ejecutar('run', scenario=str(self.dir / 'no_existe.json'), out=str(self.salida))
        self.assertEqual(codigo, 2)

    def test_estado_inicial(self):
        ruta = self.escribir_json('inicial.json', {'x': X_INICIAL})
        codigo, _, _ = self.ejecutar('run', method='cd', scenario=str(self.escenario), out=str(self.salida),
                                     initial_state=str(ruta), n_large=1, n_small=1)
        self.assertIn(codigo, (0, 3))
        with (self.salida / 'trayectoria_cd.csv').open(encoding='utf-8') as archivo:
            primera = next(csv.DictReader(archivo))
        self.assertEqual(float(primera['x_1_1']), 4.0)
        self.assertEqual(float(primera['x_3_2']), 0.56)

    def test_estado_inicial_incompleto(self):
        incompleto = {k: v for k, v in X_INICIAL.items() if k != 'x_2_2'}
        ruta = self.escribir_json('inicial.json', {'x': incompleto})
        codigo, _, mensaje = self.ejecutar('run', method='nocoding', scenario=str(self.escenario),
                                           out=str(self.salida), initial_state=str(ruta))
        self.assertEqual(codigo, 2)
        self.assertIn('x_2_2', mensaje)


class CompareTests(ComandoTestCase):
    def test_comparacion_de_referencia(self):
        codigo, stdout, _ = self.ejecutar('compare', scenario=str(self.escenario), out=str(self.salida))
        self.assertEqual(codigo, 0)
        self.assertIn('Orden de costos verificado', stdout)
        self.assertIn('DD - CD =', stdout)

        datos = json.loads((self.salida / 'comparacion.json').read_text(encoding='utf-8'))
        self.assertTrue(datos['ordering_passed'])
        self.assertEqual([f['method'] for f in datos['rows']], ['oracle', 'dd', 'cd', 'nocoding'])
        self.assertAlmostEqual(datos['rows'][0]['gap_to_oracle'], 0.0)

        with (self.salida / 'comparacion.csv').open(encoding='utf-8') as archivo:
            filas = list(csv.reader(archivo))
        self.assertEqual(filas[0], ['method', 'cost_exact', 'gap_to_oracle', 'wardrop_gap', 'iterations', 'runtime_s'])
        self.assertEqual(len(filas), 5)

        with (self.salida / 'series_costos.csv').open(encoding='utf-8') as archivo:
            series = list(csv.reader(archivo))
        self.assertEqual(series[0], ['k', 'oracle', 'dd', 'cd', 'nocoding'])
        self.assertEqual(len(series) - 1, 50)
        self.assertAlmostEqual(float(series[-1][4]), 57.641, places=6)

        self.assertEqual(Ejecucion.objects.get().metodo, 'compare')


class GradcheckTests(ComandoTestCase):
    def test_chequeo_con_r_moderado(self):
        codigo, stdout, _ = self.ejecutar('gradcheck', scenario=str(self.escenario), r=-8.0, samples=20,
                                          out=str(self.salida))
        self.assertEqual(codigo, 0)
        self.assertIn('Error relativo máximo', stdout)
        reporte = json.loads((self.salida / 'gradcheck.json').read_text(encoding='utf-8'))
        self.assertFalse(reporte['skipped'])
        self.assertLessEqual(reporte['payoff_error'], 1e-4)
        self.assertLessEqual(reporte['capacity_error'], 1e-4)
        self.assertEqual(Ejecucion.objects.get().metodo, 'gradcheck')

    def test_omitido_con_r_muy_negativo(self):
        codigo, stdout, _ = self.ejecutar('gradcheck', scenario=str(self.escenario), out=str(self.salida))
        self.assertEqual(codigo, 0)
        self.assertIn('Chequeo omitido', stdout)
        reporte = json.loads((self.salida / 'gradcheck.json').read_text(encoding='utf-8'))
        self.assertTrue(reporte['skipped'])


class ConfiguracionTests(SimpleTestCase):
    def test_formulario_rechaza_valores_no_positivos(self):
        form = RunConfigForm(data={'seed': 1, 'eta': 0.0, 'n_large': -3})
        self.assertFalse(form.is_valid())
        self.assertIn('eta', form.errors)
        self.assertIn('n_large', form.errors)

    def test_validar_opciones(self):
        with self.assertRaisesMessage(ParameterError, 'Indique --scenario o --seed.'):
            validar_opciones({'r': -10.0})
        datos = validar_opciones({'seed': 3, 'r': -10.0, 'kappa': None})
        self.assertEqual(datos['r'], -10.0)

    @override_settings(SIMULADOR_ETA=0.02, SIMULADOR_KAPPA=0.9, SIMULADOR_DIRECTORIO_SALIDA='/tmp/salidas')
    def test_precedencia_de_parametros(self):
        run_config = build_run_config({'seed': 1, 'r': -10.0}, ScenarioParams(r=-50.0, kappa=0.7))
        self.assertEqual(run_config.sp.r, -10.0)
        self.assertEqual(run_config.ctrl.kappa, 0.7)
        self.assertEqual(run_config.bnn.eta, 0.02)
        self.assertEqual(run_config.method, 'dd')
        self.assertEqual(str(run_config.out), '/tmp/salidas')
        self.assertEqual(run_config.params_echo()['kappa'], 0.7)
        self.assertTrue(run_config.ctrl.backtracking)

    @override_settings(SIMULADOR_RETROCESO_CAPACIDADES=False)
    def test_retroceso_de_capacidades_desde_la_linea_de_comandos(self):
        self.assertFalse(build_run_config({'seed': 1}, ScenarioParams()).ctrl.backtracking)
        datos = validar_opciones({'seed': 1, 'backtracking': True})
        run_config = build_run_config(datos, ScenarioParams())
        self.assertTrue(run_config.ctrl.backtracking)
        self.assertTrue(run_config.params_echo()['backtracking'])

    def test_estado_inicial_con_etiqueta_desconocida(self):
        escenario = resolve(reference_scenario())
        with tempfile.TemporaryDirectory() as directorio:
            ruta = Path(directorio) / 'inicial.json'
            ruta.write_text(json.dumps({'x': X_INICIAL, 'y': {'y_7': 1.0}}), encoding='utf-8')
            with self.assertRaisesMessage(ParameterError, 'y_7'):
                leer_estado_inicial(ruta, escenario)

            ruta.write_text(json.dumps({'x': X_INICIAL, 'y': {'y_2': 1.5}}), encoding='utf-8')
            estado = leer_estado_inicial(ruta, escenario)
            np.testing.assert_array_equal(estado.y, [0.0, 1.5])

            ruta.write_text(json.dumps({'x': X_INICIAL | {'x_1_1': 5.0}}), encoding='utf-8')
            with self.assertRaisesMessage(ParameterError, 'el flujo 1 suma'):
                leer_estado_inicial(ruta, escenario)

    def test_chequear_gradientes_directo(self):
        escenario = resolve(reference_scenario())
        reporte = chequear_gradientes(escenario, SmoothingParams(r=-8.0), muestras=10, seed=5)
        self.assertEqual(reporte['samples'], 10)
        self.assertLessEqual(reporte['payoff_error'], 1e-4)
        omitido = chequear_gradientes(escenario, SmoothingParams(r=-100.0), muestras=10)
        self.assertTrue(omitido['skipped'])


class EjecucionModelTests(TestCase):
    def test_registrar_y_convergio(self):
        ejecucion = Ejecucion.registrar(
            metodo='dd', hash_escenario='a' * 64, parametros={'r': -100.0},
            costo_exacto=50.8, brecha_wardrop=0.4, codigo_salida=3, directorio_salida=Path('/tmp/x'),
        )
        self.assertFalse(ejecucion.convergio)
        self.assertEqual(ejecucion.directorio_salida, '/tmp/x')
        self.assertIn('Dinámica desacoplada - aaaaaaaaaaaa', str(ejecucion))
        self.assertTrue(Ejecucion.objects.filter(metodo='dd', codigo_salida=3).exists())
