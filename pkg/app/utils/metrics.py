"""
Métricas de comparación entre trayectorias de grieta
"""

import numpy as np
from scipy.spatial.distance import cdist

from app.schemas.geometry import CrackPath


def discrete_frechet(p: np.ndarray, q: np.ndarray) -> float:
    """
    Distancia de Fréchet discreta entre dos secuencias de vértices

    Programación dinámica sobre la tabla de distancias entre pares.

    Raises:
        ValueError: Si alguna secuencia está vacía
    """
    p = np.atleast_2d(np.asarray(p, dtype=float))
    q = np.atleast_2d(np.asarray(q, dtype=float))
    if p.size == 0 or q.size == 0:
        raise ValueError("Las secuencias de vértices no pueden estar vacías")

    d = cdist(p, q)
    n, m = d.shape
    tabla = np.empty((n, m))
    tabla[0] = np.maximum.accumulate(d[0])
    for i in range(1, n):
        tabla[i, 0] = max(tabla[i - 1, 0], d[i, 0])
        for j in range(1, m):
            tabla[i, j] = max(
                min(tabla[i - 1, j], tabla[i, j - 1], tabla[i - 1, j - 1]),
                d[i, j],
            )
    return float(tabla[-1, -1])


def frechet_distance(a: CrackPath, b: CrackPath) -> float:
    """Distancia de Fréchet discreta entre dos trayectorias [m]"""
    return discrete_frechet(a.as_array(), b.as_array())
