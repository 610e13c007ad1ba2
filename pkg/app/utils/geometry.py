"""
Utilidades geométricas vectorizadas
Intersección de segmentos, distancias a polilíneas y lado respecto de una grieta
"""

from typing import Tuple

import numpy as np


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def _orientation(px, py, qx, qy, rx, ry) -> np.ndarray:
    """Signo de la orientación del triángulo (p, q, r): -1, 0 o 1"""
    return np.sign(_cross(qx - px, qy - py, rx - px, ry - py))


def _on_segment(px, py, qx, qy, rx, ry) -> np.ndarray:
    """r colineal con pq y dentro de su caja envolvente"""
    return (
        (np.minimum(px, qx) <= rx) & (rx <= np.maximum(px, qx))
        & (np.minimum(py, qy) <= ry) & (ry <= np.maximum(py, qy))
    )


def segments_intersect(p1: np.ndarray, p2: np.ndarray, q1, q2) -> np.ndarray:
    """
    Prueba de intersección segmento-segmento por orientaciones

    Los contactos en extremos y los solapes colineales cuentan como
    intersección.

    Args:
        p1, p2: Extremos de m segmentos (m, 2)
        q1, q2: Extremos de un segmento (2,)

    Returns:
        Máscara booleana (m,)
    """
    p1 = np.atleast_2d(p1)
    p2 = np.atleast_2d(p2)
    ax, ay = p1[:, 0], p1[:, 1]
    bx, by = p2[:, 0], p2[:, 1]
    cx, cy = float(q1[0]), float(q1[1])
    dx, dy = float(q2[0]), float(q2[1])

    o1 = _orientation(ax, ay, bx, by, cx, cy)
    o2 = _orientation(ax, ay, bx, by, dx, dy)
    o3 = _orientation(cx, cy, dx, dy, ax, ay)
    o4 = _orientation(cx, cy, dx, dy, bx, by)

    general = (o1 != o2) & (o3 != o4)
    special = (
        ((o1 == 0) & _on_segment(ax, ay, bx, by, cx, cy))
        | ((o2 == 0) & _on_segment(ax, ay, bx, by, dx, dy))
        | ((o3 == 0) & _on_segment(cx, cy, dx, dy, ax, ay))
        | ((o4 == 0) & _on_segment(cx, cy, dx, dy, bx, by))
    )
    return general | special


def segments_cross_polyline(p1: np.ndarray, p2: np.ndarray, polyline: np.ndarray) -> np.ndarray:
    """Máscara de segmentos que tocan cualquier tramo de la polilínea"""
    hit = np.zeros(len(p1), dtype=bool)
    for a, b in zip(polyline[:-1], polyline[1:]):
        hit |= segments_intersect(p1, p2, a, b)
    return hit


def segments_hit_circle(p1: np.ndarray, p2: np.ndarray, center, radius: float) -> np.ndarray:
    """Máscara de segmentos que pasan por el interior de un círculo"""
    c = np.asarray(center, dtype=float)
    d = p2 - p1
    dd = np.einsum("ij,ij->i", d, d)
    t = np.clip(np.einsum("ij,ij->i", c - p1, d) / np.where(dd > 0, dd, 1.0), 0.0, 1.0)
    nearest = p1 + t[:, None] * d
    return np.hypot(nearest[:, 0] - c[0], nearest[:, 1] - c[1]) < radius


def point_segment_distance(points: np.ndarray, a, b) -> Tuple[np.ndarray, np.ndarray]:
    """
    Distancia de puntos a un segmento

    Returns:
        (distancia (n,), parámetro t en [0, 1] del punto más cercano)
    """
    a = np.asarray(a, dtype=float)
    d = np.asarray(b, dtype=float) - a
    dd = float(d @ d)
    t = np.clip((points - a) @ d / dd, 0.0, 1.0)
    nearest = a + t[:, None] * d
    return np.hypot(points[:, 0] - nearest[:, 0], points[:, 1] - nearest[:, 1]), t


def polyline_distance(points: np.ndarray, polyline: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Distancia mínima de cada punto a la polilínea

    Returns:
        (distancia (n,), índice del tramo más cercano (n,))
    """
    dist, index, _ = _nearest_segment(points, polyline)
    return dist, index


def _nearest_segment(points, polyline):
    points = np.atleast_2d(np.asarray(points, dtype=float))
    best = np.full(len(points), np.inf)
    index = np.zeros(len(points), dtype=np.int64)
    param = np.zeros(len(points))
    for k, (a, b) in enumerate(zip(polyline[:-1], polyline[1:])):
        dist, t = point_segment_distance(points, a, b)
        closer = dist < best
        best[closer] = dist[closer]
        index[closer] = k
        param[closer] = t[closer]
    return best, index, param


def _left_normals(polyline: np.ndarray) -> np.ndarray:
    d = np.diff(polyline, axis=0)
    n = np.column_stack([-d[:, 1], d[:, 0]])
    return n / np.hypot(n[:, 0], n[:, 1])[:, None]


def signed_side(points: np.ndarray, polyline: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Lado de cada punto respecto de la polilínea

    +1 a la izquierda del sentido boca -> punta. Si el punto más cercano es
    un vértice interior se usa la seudo-normal (suma de las normales de los
    dos tramos). Los puntos sobre la polilínea reciben signo 0.

    Returns:
        (signo (n,), distancia (n,))
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    polyline = np.asarray(polyline, dtype=float)
    dist, index, t = _nearest_segment(points, polyline)
    normals = _left_normals(polyline)
    n_seg = len(normals)

    normal = normals[index].copy()
    anchor = polyline[index].copy()

    at_start = (t == 0.0) & (index > 0)
    normal[at_start] += normals[index[at_start] - 1]

    at_end = (t == 1.0) & (index < n_seg - 1)
    normal[at_end] += normals[index[at_end] + 1]
    anchor[at_end] = polyline[index[at_end] + 1]

    side = np.einsum("ij,ij->i", points - anchor, normal)
    sign = np.sign(side)
    sign[dist == 0.0] = 0.0
    return sign, dist


def distance_to_end_along(points: np.ndarray, polyline: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Distancia al extremo final medida a lo largo de la polilínea

    Cada punto se proyecta sobre su tramo más cercano. En el último tramo la
    proyección no se recorta: delante del extremo la distancia es negativa.

    Returns:
        (s (n,), gradiente ds/dx (n, 2); nulo donde la proyección cae en un vértice interior)
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    polyline = np.asarray(polyline, dtype=float)
    _, index, t = _nearest_segment(points, polyline)

    d = np.diff(polyline, axis=0)
    lengths = np.hypot(d[:, 0], d[:, 1])
    tangents = d / lengths[:, None]
    after = np.concatenate([np.cumsum(lengths[::-1])[::-1][1:], [0.0]])

    s = lengths[index] * (1.0 - t) + after[index]
    grad = -tangents[index]

    last = index == len(lengths) - 1
    s[last] = -(points[last] - polyline[-1]) @ tangents[-1]
    vertice = ~last & ((t <= 0.0) | (t >= 1.0))
    grad[vertice] = 0.0
    return s, grad


def polyline_length(polyline: np.ndarray) -> float:
    seg = np.diff(np.asarray(polyline, dtype=float), axis=0)
    return float(np.hypot(seg[:, 0], seg[:, 1]).sum())
