"""
Opciones compartidas por run, gradcheck y compare
"""

from argparse import BooleanOptionalAction


def agregar_opciones_corrida(parser, metodo=False):
    if metodo:
        parser.add_argument('--method', choices=['dd', 'cd', 'nocoding', 'oracle', 'all'], default='dd',
                            help='Sistema a simular')
    parser.add_argument('--scenario', help='Archivo JSON del escenario')
    parser.add_argument('--seed', type=int, help='Semilla para generar un escenario aleatorio')
    parser.add_argument('--r', type=float, help='Exponente de suavizado (negativo)')
    parser.add_argument('--floor', type=float, help='Piso positivo de la media r')
    parser.add_argument('--kappa', type=float, help='Ganancia del controlador de capacidades')
    parser.add_argument('--eta', type=float, help='Paso de la dinámica BNN')
    parser.add_argument('--step', type=float, help='Paso del controlador de capacidades')
    parser.add_argument('--steps-large', dest='n_large', type=int, help='Número de pasos largos')
    parser.add_argument('--steps-small', dest='n_small', type=int, help='Pasos BNN por paso largo')
    parser.add_argument('--tol', type=float, help='Tolerancia de la brecha Wardrop')
    parser.add_argument('--capacity-backtracking', dest='backtracking', action=BooleanOptionalAction,
                        help='Retroceso por hiper-enlace en el controlador de capacidades')
    parser.add_argument('--out', help='Directorio de salida')


CAMPOS = ('method', 'scenario', 'seed', 'r', 'floor', 'kappa', 'eta', 'step',
          'n_large', 'n_small', 'tol', 'backtracking', 'initial_state', 'out')


def opciones_corrida(options: dict) -> dict:
    return {campo: options.get(campo) for campo in CAMPOS}
