"""
Simplex denso en dos fases con la regla de Bland

Resuelve  min c·z  sujeto a  A z = b,  z >= 0  sobre un tableau numpy.
Las columnas unitarias existentes forman la base inicial; el resto de las
filas recibe variables artificiales que la fase I elimina.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)


class LinearProgramError(RuntimeError):
    """Programa lineal infactible o no acotado."""


@dataclass(frozen=True)
class ResultadoSimplex:
    z: np.ndarray
    valor: float
    iteraciones: int
    base: tuple[int, ...]
    residuo: float


def _pivotar(T, base, fila, columna):
    T[fila] /= T[fila, columna]
    for i in range(T.shape[0]):
        if i != fila and T[i, columna] != 0.0:
            T[i] -= T[i, columna] * T[fila]
    base[fila] = columna


def _fase(T, base, costo, permitidas, tol, max_iter, etiqueta):
    """Itera con Bland hasta que ningún costo reducido sea negativo."""
    m = T.shape[0]
    iteraciones = 0
    while True:
        reducidos = costo - costo[base] @ T[:, :-1]
        candidatas = np.flatnonzero((reducidos < -tol) & permitidas)
        if candidatas.size == 0:
            return iteraciones
        if iteraciones >= max_iter:
            raise LinearProgramError(f'{etiqueta}: se superó el máximo de {max_iter} iteraciones')
        entra = int(candidatas[0])
        columna = T[:, entra]
        positivas = np.flatnonzero(columna > tol)
        if positivas.size == 0:
            raise LinearProgramError(f'{etiqueta}: programa no acotado (columna {entra})')
        razones = T[positivas, -1] / columna[positivas]
        minima = razones.min()
        empatadas = positivas[razones <= minima + tol * max(1.0, abs(minima))]
        sale = int(min(empatadas, key=lambda i: base[i]))
        _pivotar(T, base, sale, entra)
        iteraciones += 1
        if m and iteraciones % 200 == 0:
            logger.debug('%s: %d iteraciones', etiqueta, iteraciones)


def simplex_bland(A, b, c, tol: float = 1e-9, max_iter: int = 50000) -> ResultadoSimplex:
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    c = np.array(c, dtype=float)
    m, n = A.shape

    negativas = b < 0
    A[negativas] *= -1.0
    b[negativas] *= -1.0

    base = [-1] * m
    for j in range(n):
        columna = A[:, j]
        no_nulas = np.flatnonzero(np.abs(columna) > tol)
        if no_nulas.size == 1 and abs(columna[no_nulas[0]] - 1.0) <= tol and base[no_nulas[0]] == -1:
            base[no_nulas[0]] = j

    filas_artificiales = [i for i in range(m) if base[i] == -1]
    n_art = len(filas_artificiales)
    T = np.zeros((m, n + n_art + 1))
    T[:, :n] = A
    T[:, -1] = b
    for k, i in enumerate(filas_artificiales):
        T[i, n + k] = 1.0
        base[i] = n + k

    iteraciones = 0
    if n_art:
        costo_fase1 = np.zeros(n + n_art)
        costo_fase1[n:] = 1.0
        iteraciones += _fase(T, base, costo_fase1, np.ones(n + n_art, dtype=bool), tol, max_iter, 'fase I')
        infactibilidad = float(costo_fase1[base] @ T[:, -1])
        if infactibilidad > tol * max(1.0, float(np.abs(b).max(initial=0.0))):
            raise LinearProgramError(f'programa infactible (fase I termina en {infactibilidad:.3e})')

        redundantes = []
        for i in range(m):
            if base[i] >= n:
                reales = np.flatnonzero(np.abs(T[i, :n]) > tol)
                if reales.size:
                    _pivotar(T, base, i, int(reales[0]))
                else:
                    redundantes.append(i)
        if redundantes:
            logger.debug('Eliminando %d filas redundantes', len(redundantes))
            conservar = [i for i in range(m) if i not in redundantes]
            T = T[conservar]
            base = [base[i] for i in conservar]
        T = np.hstack([T[:, :n], T[:, -1:]])

    iteraciones += _fase(T, base, c, np.ones(n, dtype=bool), tol, max_iter, 'fase II')

    z = np.zeros(n)
    z[base] = T[:, -1]
    z = np.maximum(z, 0.0)
    residuo = float(np.abs(A @ z - b).max(initial=0.0))
    logger.debug('Simplex: %d iteraciones, valor %.9g, residuo %.2e', iteraciones, c @ z, residuo)
    return ResultadoSimplex(z=z, valor=float(c @ z), iteraciones=iteraciones, base=tuple(base), residuo=residuo)
