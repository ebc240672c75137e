import json
from dataclasses import replace

from django.test import SimpleTestCase

from .escenarios import (
    ScenarioParseError, dump_scenario, reference_scenario, parse_scenario, scenario_hash,
    serialize_scenario,
)
from .generador import generate_random_scenario
from .red import (
    AUTO, Flow, HyperLinkDecl, Link, Network, Node, PhysicalPath, ScenarioConfig,
    StructuralError, build_hyperpaths, detect_hyperlinks, path_base_cost, resolve, validate,
)


def red_lineal(nodos, costo=1.0):
    return Network(
        nodes=tuple(Node(n) for n in nodos),
        links=tuple(Link(a, b, costo) for a, b in zip(nodos, nodos[1:])),
        symmetric=True,
    )


def corredor(nodos=('n1', 'n2', 'n3', 'n4'), carga=1.0, hyperlinks=AUTO):
    """Dos flujos que recorren el mismo corredor en sentidos opuestos."""
    return ScenarioConfig(
        network=red_lineal(nodos),
        flows=(
            Flow(1, nodos[0], nodos[-1], carga, (PhysicalPath(tuple(nodos)),)),
            Flow(2, nodos[-1], nodos[0], carga, (PhysicalPath(tuple(reversed(nodos))),)),
        ),
        hyperlinks=hyperlinks,
    )


class ValidacionTests(SimpleTestCase):
    def test_escenario_de_referencia_valido(self):
        self.assertEqual(validate(reference_scenario()), [])

    def test_nodo_desconocido_en_camino(self):
        config = ScenarioConfig(
            network=red_lineal(('n1', 'n2')),
            flows=(Flow(1, 'n1', 'n2', 1.0, (PhysicalPath(('n1', 'n9')),)),),
        )
        self.assertIn('unknown node n9', validate(config))

    def test_costo_negativo(self):
        config = ScenarioConfig(
            network=Network(nodes=(Node('n1'), Node('n2')), links=(Link('n1', 'n2', -1.0),)),
            flows=(Flow(1, 'n1', 'n2', 1.0, (PhysicalPath(('n1', 'n2')),)),),
        )
        self.assertEqual(validate(config), ['negative link cost'])

    def test_camino_que_no_llega_al_destino(self):
        config = ScenarioConfig(
            network=red_lineal(('n1', 'n2', 'n3')),
            flows=(Flow(1, 'n1', 'n3', 1.0, (PhysicalPath(('n1', 'n2')),)),),
        )
        self.assertEqual(validate(config), ['path 1.1 does not end at destination n3'])

    def test_enlace_faltante_en_red_dirigida(self):
        red = Network(nodes=(Node('n1'), Node('n2')), links=(Link('n1', 'n2', 1.0),))
        config = ScenarioConfig(network=red, flows=(Flow(1, 'n2', 'n1', 1.0, (PhysicalPath(('n2', 'n1')),)),))
        self.assertEqual(validate(config), ['path 1.1 uses missing link n2->n1'])

    def test_carga_no_positiva_y_flujo_sin_caminos(self):
        config = ScenarioConfig(network=red_lineal(('n1', 'n2')), flows=(Flow(1, 'n1', 'n2', 0.0, ()),))
        self.assertEqual(validate(config), ['non-positive load for flow 1', 'flow 1 has no paths'])

    def test_hiperenlace_declarado_duplicado(self):
        decl = HyperLinkDecl('n2', (1, 1), (2, 1))
        config = corredor(hyperlinks=(decl, HyperLinkDecl('n2', (2, 1), (1, 1))))
        self.assertIn('duplicate hyper-link at n2', validate(config))

    def test_hiperenlace_en_extremo_del_camino(self):
        config = corredor(hyperlinks=(HyperLinkDecl('n1', (1, 1), (2, 1)),))
        self.assertIn('hyper-link at n1 is not interior to path 1.1', validate(config))

    def test_conflicto_de_hiperenlaces_en_un_nodo(self):
        nodos = ('n1', 'n2', 'n3')
        config = ScenarioConfig(
            network=red_lineal(nodos),
            flows=(
                Flow(1, 'n1', 'n3', 1.0, (PhysicalPath(nodos),)),
                Flow(2, 'n3', 'n1', 1.0, (PhysicalPath(tuple(reversed(nodos))),)),
                Flow(3, 'n3', 'n1', 1.0, (PhysicalPath(tuple(reversed(nodos))),)),
            ),
            hyperlinks=(HyperLinkDecl('n2', (1, 1), (2, 1)), HyperLinkDecl('n2', (1, 1), (3, 1))),
        )
        self.assertEqual(validate(config), ['conflicting hyper-links at node n2'])


class CaminosTests(SimpleTestCase):
    def setUp(self):
        self.red = reference_scenario().network

    def test_costo_base_de_caminos(self):
        self.assertAlmostEqual(path_base_cost(PhysicalPath(('n1', 'n2', 'n3', 'n4')), self.red), 6.2)
        self.assertAlmostEqual(path_base_cost(PhysicalPath(('n5', 'n2', 'n1')), self.red), 4.1)
        self.assertEqual(path_base_cost(PhysicalPath(('n3',)), self.red), 0.0)

    def test_costo_aditivo_al_concatenar(self):
        primero = path_base_cost(PhysicalPath(('n1', 'n2', 'n3')), self.red)
        segundo = path_base_cost(PhysicalPath(('n3', 'n4')), self.red)
        total = path_base_cost(PhysicalPath(('n1', 'n2', 'n3', 'n4')), self.red)
        self.assertAlmostEqual(primero + segundo, total)

    def test_enlace_faltante(self):
        with self.assertRaises(StructuralError):
            path_base_cost(PhysicalPath(('n1', 'n4')), self.red)

    def test_betas_del_escenario_resuelto(self):
        escenario = resolve(reference_scenario())
        for obtenido, esperado in zip(escenario.beta, (6.2, 6.2, 5.1, 5.1, 4.5, 4.1)):
            self.assertAlmostEqual(obtenido, esperado)


class HiperEnlacesTests(SimpleTestCase):
    def test_deteccion_en_escenario_de_referencia(self):
        config = reference_scenario()
        h1, h2 = detect_hyperlinks(config.network, config.flows)

        self.assertEqual((h1.id, h1.coding_node), (1, 'n2'))
        self.assertEqual((h1.side_a.pair, h1.side_a.next_hop, h1.side_a.alpha), ((1, 2), 'n5', 1.3))
        self.assertEqual((h1.side_b.pair, h1.side_b.next_hop, h1.side_b.alpha), ((3, 2), 'n1', 2.8))

        self.assertEqual((h2.id, h2.coding_node), (2, 'n3'))
        self.assertEqual((h2.side_a.pair, h2.side_a.next_hop, h2.side_a.alpha), ((1, 1), 'n4', 1.8))
        self.assertEqual((h2.side_b.pair, h2.side_b.next_hop, h2.side_b.alpha), ((2, 1), 'n2', 1.6))

    def test_un_solo_flujo_no_tiene_hiperenlaces(self):
        config = reference_scenario()
        self.assertEqual(detect_hyperlinks(config.network, config.flows[:1]), [])

    def test_corredor_con_un_hiperenlace_por_nodo_interior(self):
        config = corredor()
        hiper = detect_hyperlinks(config.network, config.flows)
        self.assertEqual([h.coding_node for h in hiper], ['n2', 'n3'])

    def test_deteccion_no_depende_del_orden_de_los_flujos(self):
        config = reference_scenario()
        directo = detect_hyperlinks(config.network, config.flows)
        invertido = detect_hyperlinks(config.network, tuple(reversed(config.flows)))
        self.assertEqual({h.label for h in directo}, {h.label for h in invertido})

    def test_hipercaminos_de_referencia(self):
        config = reference_scenario()
        hiper = detect_hyperlinks(config.network, config.flows)
        anotados = {(hp.flow, hp.path): hp.hyperlinks for hp in build_hyperpaths(config.flows, hiper)}
        self.assertEqual(anotados, {
            (1, 1): (2,), (1, 2): (1,),
            (2, 1): (2,), (2, 2): (),
            (3, 1): (), (3, 2): (1,),
        })

    def test_hipercaminos_rechazan_conflicto(self):
        nodos = ('n1', 'n2', 'n3')
        config = ScenarioConfig(
            network=red_lineal(nodos),
            flows=(
                Flow(1, 'n1', 'n3', 1.0, (PhysicalPath(nodos),)),
                Flow(2, 'n3', 'n1', 1.0, (PhysicalPath(tuple(reversed(nodos))),)),
                Flow(3, 'n3', 'n1', 1.0, (PhysicalPath(tuple(reversed(nodos))),)),
            ),
        )
        hiper = detect_hyperlinks(config.network, config.flows)
        self.assertEqual(len(hiper), 2)
        with self.assertRaisesMessage(StructuralError, 'conflicting hyper-links at node n2'):
            build_hyperpaths(config.flows, hiper)

    def test_alfas_coinciden_con_costos_de_enlace(self):
        escenario = resolve(reference_scenario())
        for h in escenario.hyperlinks:
            for lado in (h.side_a, h.side_b):
                self.assertEqual(lado.alpha, escenario.network.cost(h.coding_node, lado.next_hop))


class FormatoEscenarioTests(SimpleTestCase):
    def test_ida_y_vuelta(self):
        config = reference_scenario()
        releido = parse_scenario(dump_scenario(config))
        self.assertEqual(releido, config)
        self.assertEqual(scenario_hash(releido), scenario_hash(config))

    def test_ida_y_vuelta_con_hiperenlaces_explicitos(self):
        config = corredor(hyperlinks=(HyperLinkDecl('n2', (1, 1), (2, 1)),))
        self.assertEqual(parse_scenario(dump_scenario(config)), config)

    def test_numero_mal_formado(self):
        datos = serialize_scenario(reference_scenario())
        datos['links'][0]['cost'] = 'dos'
        with self.assertRaisesMessage(ScenarioParseError, 'links[0]'):
            parse_scenario(json.dumps(datos))

    def test_json_invalido(self):
        with self.assertRaises(ScenarioParseError):
            parse_scenario('{"nodes": [')

    def test_campo_ausente(self):
        with self.assertRaisesMessage(ScenarioParseError, 'falta el campo "flows"'):
            parse_scenario(json.dumps({'nodes': ['n1'], 'links': []}))

    def test_r_no_negativo_en_parametros(self):
        datos = serialize_scenario(reference_scenario())
        datos['params']['r'] = 2
        with self.assertRaises(ScenarioParseError):
            parse_scenario(json.dumps(datos))

    def test_hash_cambia_con_el_escenario(self):
        config = reference_scenario()
        otro = replace(config, flows=config.flows[:2])
        self.assertNotEqual(scenario_hash(config), scenario_hash(otro))


class GeneradorTests(SimpleTestCase):
    def test_escenario_aleatorio_valido_y_reproducible(self):
        config = generate_random_scenario(7)
        self.assertEqual(validate(config), [])
        self.assertEqual(scenario_hash(config), scenario_hash(generate_random_scenario(7)))
        self.assertEqual(len(config.network.nodes), 30)
        self.assertEqual(len(config.flows), 6)

    def test_flujos_en_pares_opuestos(self):
        config = generate_random_scenario(3, n_nodes=20, n_flows=4)
        for ida, vuelta in zip(config.flows[::2], config.flows[1::2]):
            self.assertEqual((ida.source, ida.dest), (vuelta.dest, vuelta.source))
            self.assertTrue(2 <= len(ida.paths) <= 3)
            self.assertEqual(
                [c.node_sequence for c in vuelta.paths],
                [tuple(reversed(c.node_sequence)) for c in ida.paths],
            )

    def test_escenario_aleatorio_se_resuelve(self):
        escenario = resolve(generate_random_scenario(11))
        self.assertEqual(escenario.n_vars, len(escenario.var_labels))
        self.assertTrue(all(b > 0 for b in escenario.beta))
