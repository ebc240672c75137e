"""
Escritura de resultados

Este archivo contiene:
- escribir_trayectoria: CSV con t, X, Y, costos y brecha Wardrop
- escribir_json: resúmenes con numpy serializado
- escribir_comparacion: tabla de comparación en CSV y JSON
- escribir_series: costo exacto por paso largo y método (datos de la gráfica)
"""

import csv
import json
from pathlib import Path

import numpy as np
from django.core.serializers.json import DjangoJSONEncoder


class SimuladorJSONEncoder(DjangoJSONEncoder):
    """DjangoJSONEncoder que además entiende arreglos y escalares numpy."""

    def default(self, o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, Path):
            return str(o)
        return super().default(o)


def columnas_trayectoria(scenario) -> list[str]:
    return ['t', *scenario.var_labels, *scenario.capacity_labels, 'cost_exact', 'cost_smoothed', 'wardrop_gap']


def escribir_trayectoria(ruta, trayectoria, scenario) -> Path:
    ruta = Path(ruta)
    with ruta.open('w', newline='', encoding='utf-8') as archivo:
        writer = csv.writer(archivo)
        writer.writerow(columnas_trayectoria(scenario))
        for registro in trayectoria.records:
            writer.writerow([
                repr(registro.t),
                *(repr(float(v)) for v in registro.x),
                *(repr(float(v)) for v in registro.y),
                repr(registro.cost_exact),
                repr(registro.cost_smoothed),
                repr(registro.wardrop_gap),
            ])
    return ruta


def escribir_json(ruta, datos) -> Path:
    ruta = Path(ruta)
    ruta.write_text(json.dumps(datos, cls=SimuladorJSONEncoder, indent=2, ensure_ascii=False) + '\n',
                    encoding='utf-8')
    return ruta


def etiquetar(valores, etiquetas) -> dict:
    return {e: float(v) for e, v in zip(etiquetas, valores)}


def escribir_comparacion(directorio, informe, scenario, extra=None) -> tuple[Path, Path]:
    directorio = Path(directorio)
    ruta_csv = directorio / 'comparacion.csv'
    with ruta_csv.open('w', newline='', encoding='utf-8') as archivo:
        writer = csv.writer(archivo)
        writer.writerow(['method', 'cost_exact', 'gap_to_oracle', 'wardrop_gap', 'iterations', 'runtime_s'])
        for fila in informe.rows.values():
            writer.writerow([
                fila.method,
                repr(fila.cost_exact),
                repr(informe.gap_to_oracle(fila.method)),
                '' if fila.wardrop_gap is None else repr(fila.wardrop_gap),
                fila.iterations,
                f'{fila.runtime:.4f}',
            ])

    datos = {
        'rows': [
            {
                'method': fila.method,
                'cost_exact': fila.cost_exact,
                'gap_to_oracle': informe.gap_to_oracle(fila.method),
                'wardrop_gap': fila.wardrop_gap,
                'iterations': fila.iterations,
                'runtime_s': fila.runtime,
                'x': etiquetar(fila.x, scenario.var_labels),
                'y': etiquetar(fila.y, scenario.capacity_labels),
            }
            for fila in informe.rows.values()
        ],
        'ordering': [{'check': c.name, 'lower': c.lower, 'upper': c.upper, 'passed': c.passed}
                     for c in informe.checks],
        'ordering_passed': informe.passed,
        'dd_minus_cd': informe.dd_minus_cd,
    }
    if extra:
        datos.update(extra)
    ruta_json = escribir_json(directorio / 'comparacion.json', datos)
    return ruta_csv, ruta_json


def escribir_series(ruta, informe) -> Path:
    """Una fila por paso largo con el costo exacto de cada método."""
    ruta = Path(ruta)
    metodos = list(informe.rows)
    largo = max(len(f.series) for f in informe.rows.values())
    with ruta.open('w', newline='', encoding='utf-8') as archivo:
        writer = csv.writer(archivo)
        writer.writerow(['k', *metodos])
        for k in range(largo):
            writer.writerow([k + 1, *(repr(informe.rows[m].series[k]) if k < len(informe.rows[m].series) else ''
                                      for m in metodos)])
    return ruta
