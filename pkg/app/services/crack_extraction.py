"""
Extracción automática de la grieta a partir del daño PD

Remuestreo del daño nodal en una grilla, iso-contorno por marching squares,
eje de la banda dañada por pares de puntos opuestos y actualización de la
trayectoria de grieta.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import cKDTree
from shapely.geometry import LineString
from shapely.geometry import Point as ShapelyPoint

from app.exceptions import (
    AmbiguousBandError,
    CrackGapError,
    CrackGeometryError,
    EmptyDomainError,
    InvalidParameterError,
)
from app.schemas.geometry import CrackPath

logger = logging.getLogger(__name__)


# Ancho máximo de banda, en múltiplos del horizonte
BAND_WIDTH_FACTOR = 10.0
# Tolerancia de continuidad de una extensión, en múltiplos de h_pd
GAP_FACTOR = 2.0
# Tolerancia de simplificación, como fracción de h_pd
SIMPLIFY_FRACTION = 0.25


# ═══════════════════════════════════════════════════════════
# GRILLA DE DAÑO
# ═══════════════════════════════════════════════════════════

@dataclass
class DamageGrid:
    """
    Daño muestreado en los nodos de una grilla regular

    values[ix, iy] corresponde al punto origin + (ix, iy) * spacing.
    """

    origin: Tuple[float, float]
    spacing: float
    values: np.ndarray

    def __post_init__(self):
        if not self.spacing > 0:
            raise InvalidParameterError("spacing", self.spacing)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or min(self.values.shape) < 2:
            raise InvalidParameterError("values.shape", self.values.shape, key="OUT_OF_RANGE")
        if np.any(self.values < 0.0) or np.any(self.values > 1.0):
            raise InvalidParameterError("values", "fuera de [0, 1]", key="OUT_OF_RANGE")

    @property
    def xs(self) -> np.ndarray:
        return self.origin[0] + self.spacing * np.arange(self.values.shape[0])

    @property
    def ys(self) -> np.ndarray:
        return self.origin[1] + self.spacing * np.arange(self.values.shape[1])

    def nodes(self) -> np.ndarray:
        X, Y = np.meshgrid(self.xs, self.ys, indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel()])

    def interpolator(self) -> RegularGridInterpolator:
        """Interpolación bilineal; 0 fuera de la grilla"""
        return RegularGridInterpolator(
            (self.xs, self.ys), self.values, bounds_error=False, fill_value=0.0
        )


def resample_damage(state, spacing: float) -> DamageGrid:
    """
    Promedia el daño nodal en una grilla por inversa de la distancia

    Cada nodo de grilla promedia los nodos PD a menos de un espaciado; los
    nodos de grilla sin vecinos reciben 0.

    Args:
        state: Estado PD
        spacing: Espaciado de la grilla, >= h_pd

    Returns:
        Grilla que cubre la caja del estado
    """
    if state.n_nodes == 0:
        raise EmptyDomainError(state.box)
    h_pd = state.box.h_pd
    if spacing < h_pd * (1.0 - 1e-12):
        raise InvalidParameterError("spacing", spacing, key="OUT_OF_RANGE")

    rect = state.box.rect
    nx = int(np.floor(rect.width / spacing + 1e-9)) + 1
    ny = int(np.floor(rect.height / spacing + 1e-9)) + 1
    origin = (rect.xmin, rect.ymin)
    X, Y = np.meshgrid(
        origin[0] + spacing * np.arange(max(nx, 2)),
        origin[1] + spacing * np.arange(max(ny, 2)),
        indexing="ij"
    )
    grid_pts = np.column_stack([X.ravel(), Y.ravel()])

    damage = state.damage
    tree = cKDTree(state.positions)
    vecinos = tree.query_ball_point(grid_pts, r=spacing)
    values = np.zeros(len(grid_pts))
    eps = 1e-12 * spacing
    for k, idx in enumerate(vecinos):
        if not idx:
            continue
        idx = np.asarray(idx)
        d = np.hypot(*(state.positions[idx] - grid_pts[k]).T)
        exacto = d < eps
        if exacto.any():
            values[k] = damage[idx[exacto]].mean()
            continue
        w = 1.0 / d
        values[k] = np.dot(w, damage[idx]) / w.sum()

    return DamageGrid(origin=origin, spacing=spacing, values=np.clip(values, 0.0, 1.0).reshape(X.shape))


# ═══════════════════════════════════════════════════════════
# ISO-CONTORNO (MARCHING SQUARES)
# ═══════════════════════════════════════════════════════════

# Aristas de la celda: 0 inferior, 1 derecha, 2 superior, 3 izquierda
_SEGMENTS: Dict[int, Tuple[Tuple[int, int], ...]] = {
    1: ((3, 0),), 2: ((0, 1),), 3: ((3, 1),), 4: ((1, 2),),
    6: ((0, 2),), 7: ((3, 2),), 8: ((2, 3),), 9: ((0, 2),),
    11: ((1, 2),), 12: ((1, 3),), 13: ((0, 1),), 14: ((3, 0),),
}
# Puntos silla según el promedio de la celda: (centro dentro, centro fuera)
_SADDLES = {
    5: (((0, 1), (2, 3)), ((3, 0), (1, 2))),
    10: (((3, 0), (1, 2)), ((0, 1), (2, 3))),
}


def _edge_key(i: int, j: int, edge: int) -> Tuple[str, int, int]:
    return {
        0: ("h", i, j), 1: ("v", i + 1, j),
        2: ("h", i, j + 1), 3: ("v", i, j),
    }[edge]


def _edge_point(grid: DamageGrid, key: Tuple[str, int, int], threshold: float) -> Tuple[float, float]:
    kind, i, j = key
    v = grid.values
    a = v[i, j]
    b = v[i + 1, j] if kind == "h" else v[i, j + 1]
    t = (threshold - a) / (b - a)
    x0 = grid.origin[0] + i * grid.spacing
    y0 = grid.origin[1] + j * grid.spacing
    if kind == "h":
        return (x0 + t * grid.spacing, y0)
    return (x0, y0 + t * grid.spacing)


def iso_contour(grid: DamageGrid, threshold: float) -> List[np.ndarray]:
    """
    Iso-líneas del daño en el nivel threshold

    Los segmentos por celda se enlazan por aristas compartidas. Las curvas
    cerradas repiten su primer punto al final.

    Args:
        grid: Grilla de daño
        threshold: Nivel, en (0, 1)

    Returns:
        Lista de polilíneas (k, 2); vacía si no hay cruces
    """
    if not 0.0 < threshold < 1.0:
        raise InvalidParameterError("threshold", threshold, key="OUT_OF_RANGE")

    v = grid.values
    inside = v >= threshold
    case = (
        inside[:-1, :-1].astype(int)
        + 2 * inside[1:, :-1]
        + 4 * inside[1:, 1:]
        + 8 * inside[:-1, 1:]
    )
    promedio = 0.25 * (v[:-1, :-1] + v[1:, :-1] + v[1:, 1:] + v[:-1, 1:])

    segmentos: List[Tuple[Tuple, Tuple]] = []
    for i, j in zip(*np.nonzero((case > 0) & (case < 15))):
        c = int(case[i, j])
        if c in _SADDLES:
            dentro, fuera = _SADDLES[c]
            pares = dentro if promedio[i, j] >= threshold else fuera
        else:
            pares = _SEGMENTS[c]
        for e0, e1 in pares:
            segmentos.append((_edge_key(i, j, e0), _edge_key(i, j, e1)))

    if not segmentos:
        return []

    # Adyacencia arista -> segmentos
    por_arista: Dict[Tuple, List[int]] = {}
    for s, (a, b) in enumerate(segmentos):
        por_arista.setdefault(a, []).append(s)
        por_arista.setdefault(b, []).append(s)

    usados = np.zeros(len(segmentos), dtype=bool)

    def recorrer(inicio: int, desde: Tuple) -> List[Tuple]:
        claves = [desde]
        s, actual = inicio, desde
        while True:
            usados[s] = True
            a, b = segmentos[s]
            siguiente = b if a == actual else a
            claves.append(siguiente)
            candidatos = [t for t in por_arista[siguiente] if not usados[t]]
            if not candidatos:
                return claves
            s, actual = candidatos[0], siguiente

    curvas: List[np.ndarray] = []
    # Primero las curvas abiertas, desde un extremo libre
    for key in sorted(por_arista):
        lista = por_arista[key]
        if len(lista) == 1 and not usados[lista[0]]:
            claves = recorrer(lista[0], key)
            curvas.append(np.array([_edge_point(grid, k, threshold) for k in claves]))
    for s in range(len(segmentos)):
        if not usados[s]:
            claves = recorrer(s, segmentos[s][0])
            curvas.append(np.array([_edge_point(grid, k, threshold) for k in claves]))

    logger.debug(f"Iso-contorno {threshold}: {len(curvas)} curvas, {len(segmentos)} segmentos")
    return curvas


# ═══════════════════════════════════════════════════════════
# EJE DE LA BANDA DAÑADA
# ═══════════════════════════════════════════════════════════

def _band_midpoints(
    grid: DamageGrid,
    contours: List[np.ndarray],
    threshold: float,
    max_width: float
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Empareja cada punto del contorno con el lado opuesto de la banda

    Desde cada punto se avanza hacia el interior (gradiente del daño) hasta
    volver a cruzar el umbral.

    Returns:
        (puntos medios (m, 2), anchos (m,)); ancho inf si no hay salida
    """
    interp = grid.interpolator()
    samples = np.vstack([c for c in contours if len(c)])
    eps = 0.25 * grid.spacing

    gx = interp(samples + [eps, 0.0]) - interp(samples - [eps, 0.0])
    gy = interp(samples + [0.0, eps]) - interp(samples - [0.0, eps])
    norm = np.hypot(gx, gy)
    ok = norm > 0.0
    samples = samples[ok]
    n = np.column_stack([gx[ok], gy[ok]]) / norm[ok, None]
    if len(samples) == 0:
        return np.zeros((0, 2)), np.zeros(0)

    step = 0.25 * grid.spacing
    n_steps = int(np.ceil(1.5 * max_width / step)) + 1
    k = np.arange(1, n_steps + 1)
    ray = samples[:, None, :] + (k * step)[None, :, None] * n[:, None, :]
    vals = interp(ray.reshape(-1, 2)).reshape(len(samples), n_steps)

    below = vals < threshold
    hacia_dentro = ~below[:, 0]
    salida = np.argmax(below, axis=1)
    sin_salida = ~below.any(axis=1)

    prev = np.where(salida > 0, vals[np.arange(len(vals)), np.maximum(salida - 1, 0)], threshold)
    curr = vals[np.arange(len(vals)), salida]
    frac = np.where(prev > curr, (prev - threshold) / np.where(prev > curr, prev - curr, 1.0), 0.0)
    width = (salida + frac) * step
    width[salida == 0] = 0.0
    width = np.where(sin_salida, np.inf, width)

    keep = hacia_dentro
    samples, n, width = samples[keep], n[keep], width[keep]
    finite = np.isfinite(width)
    mid = np.full((len(samples), 2), np.nan)
    mid[finite] = samples[finite] + 0.5 * width[finite, None] * n[finite]
    return mid, width


def _geodesic_from(grid: DamageGrid, threshold: float, source: np.ndarray) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    Distancias geodésicas dentro de la banda desde el nodo más cercano a source

    Returns:
        (nodos de la banda (b, 2), distancias (b,), distancia source-nodo inicial)
    """
    mask = grid.values >= threshold
    idx = -np.ones(mask.shape, dtype=np.int64)
    idx[mask] = np.arange(int(mask.sum()))
    nodes = grid.nodes().reshape(mask.shape + (2,))[mask]

    rows, cols, data = [], [], []
    h = grid.spacing
    nx, ny = mask.shape
    for di, dj in ((1, 0), (0, 1), (1, 1), (1, -1)):
        i0, i1 = max(0, -di), nx - max(0, di)
        j0, j1 = max(0, -dj), ny - max(0, dj)
        ia = idx[i0:i1, j0:j1]
        ib = idx[i0 + di:i1 + di, j0 + dj:j1 + dj]
        both = (ia >= 0) & (ib >= 0)
        rows.append(ia[both])
        cols.append(ib[both])
        data.append(np.full(int(both.sum()), h * np.hypot(di, dj)))

    n = len(nodes)
    graph = coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()
    tree = cKDTree(nodes)
    gap, start = tree.query(source)
    dist = dijkstra(graph, directed=False, indices=int(start))
    return nodes, dist, float(gap)


def extract_extension(
    grid: DamageGrid,
    contours: List[np.ndarray],
    previous: CrackPath,
    threshold: float,
    delta: float,
    h_pd: float
) -> Optional[CrackPath]:
    """
    Extensión de la grieta a lo largo del eje de la banda dañada

    Los puntos medios se ordenan por distancia geodésica desde la punta
    previa y se promedian por tramos de un espaciado de grilla. Se descartan
    los puntos junto a la grieta previa salvo los que quedan delante de la
    punta.

    Returns:
        Extensión que empieza en la punta previa, o None si no hay avance

    Raises:
        AmbiguousBandError: Si la mediana del ancho de banda supera 10 * delta
    """
    if not contours or grid.values.max() < threshold:
        return None

    limit = BAND_WIDTH_FACTOR * delta
    mid, width = _band_midpoints(grid, contours, threshold, limit)
    if len(width) == 0:
        return None
    mediana = float(np.median(width))
    if mediana > limit:
        raise AmbiguousBandError(width=mediana, limit=limit)

    mid = mid[np.isfinite(width)]
    interp = grid.interpolator()
    mid = mid[interp(mid) >= threshold]
    if len(mid) == 0:
        return None

    tip = np.asarray(previous.tip)
    linea = previous.linestring()
    junto_a_grieta = np.array([
        linea.distance(ShapelyPoint(p)) <= grid.spacing
        and linea.project(ShapelyPoint(p)) < linea.length * (1.0 - 1e-12)
        for p in mid
    ], dtype=bool)
    mid = mid[~junto_a_grieta]
    if len(mid) == 0:
        return None

    nodes, dist, gap = _geodesic_from(grid, threshold, tip)
    if gap > GAP_FACTOR * h_pd + grid.spacing:
        logger.debug(f"Banda de daño separada de la punta ({gap:.3g} m): sin extensión")
        return None

    _, nearest = cKDTree(nodes).query(mid)
    geo = dist[nearest] + np.hypot(*(mid - nodes[nearest]).T)
    alcanzable = np.isfinite(dist[nearest])
    mid, geo = mid[alcanzable], geo[alcanzable]

    tramo = np.floor(geo / grid.spacing).astype(np.int64)
    puntos = []
    for b in np.unique(tramo):
        p = mid[tramo == b].mean(axis=0)
        if np.hypot(*(p - tip)) < 0.5 * grid.spacing:
            continue
        if puntos and np.hypot(*(p - puntos[-1])) == 0.0:
            continue
        puntos.append(p)
    if not puntos:
        return None

    # La nueva punta es el punto más alejado de la unión
    lejos = int(np.argmax([np.hypot(*(p - tip)) for p in puntos]))
    puntos = puntos[:lejos + 1]

    extension = np.vstack([tip, np.array(puntos)])
    if not LineString(extension).is_simple:
        logger.warning("⚠️ Eje de banda no simple: se conserva solo el tramo recto hasta la punta")
        extension = np.vstack([tip, puntos[-1]])
    return CrackPath.from_array(extension)


def update_crack(previous: CrackPath, extension: Optional[CrackPath], h_pd: float) -> CrackPath:
    """
    Concatena una extensión a la trayectoria previa

    Solo el tramo nuevo (último segmento previo + extensión) se simplifica
    con Douglas-Peucker de tolerancia h_pd / 4; si la simplificación
    acortara la grieta se conserva el tramo sin simplificar.

    Args:
        previous: Trayectoria actual
        extension: Extensión (None: sin cambios)
        h_pd: Espaciado de la red PD [m]

    Returns:
        Trayectoria combinada

    Raises:
        CrackGapError: Si la extensión empieza a más de 2 * h_pd de la punta
        CrackGeometryError: Si el resultado se auto-intersecta
    """
    if extension is None:
        return previous

    tip = np.asarray(previous.tip)
    nuevos = extension.as_array()
    gap = float(np.hypot(*(nuevos[0] - tip)))
    if gap > GAP_FACTOR * h_pd:
        raise CrackGapError(gap)
    if gap <= 1e-12:
        nuevos = nuevos[1:]
    if len(nuevos) == 0:
        return previous

    pts = previous.as_array()
    cola = np.vstack([pts[-2:], nuevos])
    simplificada = np.asarray(LineString(cola).simplify(SIMPLIFY_FRACTION * h_pd, preserve_topology=False).coords)
    combinada = np.vstack([pts[:-2], simplificada])
    if LineString(combinada).length < previous.arc_length:
        combinada = np.vstack([pts[:-2], cola])

    distintos = np.concatenate([[True], np.any(np.diff(combinada, axis=0) != 0.0, axis=1)])
    combinada = combinada[distintos]
    if not LineString(combinada).is_simple:
        raise CrackGeometryError("SELF_INTERSECTION")

    resultado = CrackPath.from_array(combinada)
    logger.debug(
        f"Grieta actualizada: {len(resultado.points)} vértices, "
        f"longitud {resultado.arc_length:.4g} m"
    )
    return resultado


def centerline(
    contours: List[np.ndarray],
    previous: CrackPath,
    grid: DamageGrid,
    threshold: float,
    delta: float,
    h_pd: float
) -> CrackPath:
    """
    Trayectoria previa prolongada por el eje de la banda dañada

    Sin contornos devuelve la trayectoria previa sin cambios.
    """
    extension = extract_extension(grid, contours, previous, threshold, delta, h_pd)
    return update_crack(previous, extension, h_pd)
