"""
Persistencia de resultados en CSV
Trayectorias de grieta, diagnóstico por paso e instantáneas de campos

Todos los archivos usan finales de línea LF y 9 cifras significativas, de
modo que la salida es idéntica byte a byte para entradas idénticas.
"""

import csv
import logging
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from app.schemas.coupling import StepDiagnostics
from app.schemas.geometry import CrackPath

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

DIAGNOSTICS_COLUMNS = (
    "step", "load_factor", "tip_x", "tip_y",
    "box_xmin", "box_ymin", "box_xmax", "box_ymax",
    "max_damage", "local_solves",
)


def fmt(value: float) -> str:
    """Formato numérico canónico: 9 cifras significativas"""
    return f"{float(value):.9g}"


def _write_rows(file: PathLike, header: Sequence[str], rows: Iterable[Sequence[str]]) -> Path:
    path = Path(file)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


# ═══════════════════════════════════════════════════════════
# TRAYECTORIAS DE GRIETA
# ═══════════════════════════════════════════════════════════

def write_crack_csv(path: CrackPath, file: PathLike) -> Path:
    """
    Escribe una trayectoria con encabezado x,y (metros, coordenadas de viga)

    Args:
        path: Trayectoria de grieta
        file: Archivo de destino

    Returns:
        Ruta escrita
    """
    destino = _write_rows(file, ("x", "y"), ((fmt(x), fmt(y)) for x, y in path.points))
    logger.debug(f"📁 Trayectoria guardada en {destino} ({len(path.points)} vértices)")
    return destino


def read_crack_csv(file: PathLike) -> CrackPath:
    """Lee una trayectoria escrita por write_crack_csv"""
    with open(file, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or list(reader.fieldnames)[:2] != ["x", "y"]:
            raise ValueError(f"{file}: se esperaba el encabezado x,y")
        puntos = [(float(row["x"]), float(row["y"])) for row in reader]
    return CrackPath(points=tuple(puntos))


# ═══════════════════════════════════════════════════════════
# DIAGNÓSTICO
# ═══════════════════════════════════════════════════════════

def write_diagnostics_csv(diagnostics: Iterable[StepDiagnostics], file: PathLike) -> Path:
    """Una fila por paso de carga; la caja vale nan antes del primer intercambio"""
    rows = (
        (
            str(d.step), fmt(d.load_factor), fmt(d.tip_x), fmt(d.tip_y),
            fmt(d.box_xmin), fmt(d.box_ymin), fmt(d.box_xmax), fmt(d.box_ymax),
            fmt(d.max_damage), str(d.local_solves),
        )
        for d in diagnostics
    )
    return _write_rows(file, DIAGNOSTICS_COLUMNS, rows)


# ═══════════════════════════════════════════════════════════
# INSTANTÁNEAS
# ═══════════════════════════════════════════════════════════

def write_pd_snapshot(state, file: PathLike) -> Path:
    """Campos PD por nodo: x,y,ux,uy,damage"""
    cols = np.column_stack([state.positions, state.displacement, state.damage])
    return _write_rows(
        file, ("x", "y", "ux", "uy", "damage"),
        ([fmt(v) for v in row] for row in cols)
    )


def write_field_snapshot(points: np.ndarray, displacement: np.ndarray, file: PathLike) -> Path:
    """Desplazamiento global sobre una malla de muestreo: x,y,ux,uy"""
    cols = np.column_stack([points, displacement])
    return _write_rows(
        file, ("x", "y", "ux", "uy"),
        ([fmt(v) for v in row] for row in cols)
    )
