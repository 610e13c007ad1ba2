"""
Solver global de elasticidad lineal por partición de la unidad (PUM)

Cubierta uniforme de parches rectangulares estirados por alpha, pesos
flat-top cúbicos normalizados por Shepard, espacios locales bilineales y
una función escalón por parche cortado por la grieta. Cuadratura de Gauss
por celda de solape con subdivisión quadtree en celdas cortadas.
"""

import logging
import math
from concurrent.futures import Executor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import shapely
from scipy import sparse
from scipy.sparse.linalg import splu

from app.exceptions import AssemblyError, InvalidParameterError, OutOfDomainError
from app.schemas.geometry import CrackPath, DomainSpec, Point, Rect
from app.schemas.material import MaterialParams
from app.services.material import plane_strain_matrix
from app.utils.geometry import distance_to_end_along, polyline_distance, signed_side

logger = logging.getLogger(__name__)


POLY_BASIS = ("1", "xi", "eta", "xi*eta")
N_POLY = len(POLY_BASIS)
# Parches candidatos por punto (2 por eje con 1 < alpha < 2)
SLOTS = 4
N_SCALAR = SLOTS * (N_POLY + 1)
N_LOCAL = 2 * N_SCALAR

# Distancia bajo la cual un punto se considera sobre la grieta [m]
ON_CRACK_TOL = 1e-12

# Umbral relativo para modos rígidos libres y diagonales nulas
RIGID_TOL = 1e-10
DIAGONAL_TOL = 1e-12

CELLS_PER_CHUNK = 2048


# ═══════════════════════════════════════════════════════════
# CUBIERTA Y PARTICIÓN DE LA UNIDAD
# ═══════════════════════════════════════════════════════════

def _flat_top(offset: np.ndarray, radius: float, overlap: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Peso 1D flat-top: 1 en el núcleo |d| <= r - o, smoothstep cúbico en el
    solape y 0 fuera del soporte

    Args:
        offset: x - c
        radius: Semiancho del parche
        overlap: Ancho del solape

    Returns:
        (peso, derivada respecto de x)
    """
    d = np.abs(offset)
    s = np.clip((radius - d) / overlap, 0.0, 1.0)
    w = s * s * (3.0 - 2.0 * s)
    ramp = (s > 0.0) & (s < 1.0)
    dw = np.where(ramp, -6.0 * s * (1.0 - s) / overlap * np.sign(offset), 0.0)
    return w, dw


def _axis_pair(coord: np.ndarray, origin: float, h: float, n: int) -> np.ndarray:
    """Los dos índices de parche que pueden cubrir cada coordenada (-1 si no existe)"""
    s = (coord - origin) / h
    i = np.clip(np.floor(s).astype(np.int64), 0, n - 1)
    lo = np.where(s - i < 0.5, i - 1, i)
    pair = np.stack([lo, lo + 1], axis=1)
    pair[(pair < 0) | (pair >= n)] = -1
    return pair


@dataclass
class Cover:
    """
    Cubierta de parches sobre la caja envolvente de la viga

    El parche p = ix * ny + iy tiene centro en la celda (ix, iy) de la grilla
    de paso h y semiancho alpha * h / 2. Los parches contenidos en un agujero
    quedan inactivos.
    """

    domain: DomainSpec
    h: float
    alpha: float
    nx: int
    ny: int
    active: np.ndarray

    @property
    def bounds(self) -> Rect:
        return self.domain.bounds

    @property
    def spacing(self) -> Tuple[float, float]:
        b = self.bounds
        return b.width / self.nx, b.height / self.ny

    @property
    def radius(self) -> Tuple[float, float]:
        hx, hy = self.spacing
        return 0.5 * self.alpha * hx, 0.5 * self.alpha * hy

    @property
    def overlap(self) -> Tuple[float, float]:
        hx, hy = self.spacing
        return (self.alpha - 1.0) * hx, (self.alpha - 1.0) * hy

    @property
    def n_patches(self) -> int:
        return self.nx * self.ny

    @property
    def centers(self) -> np.ndarray:
        b = self.bounds
        hx, hy = self.spacing
        ix, iy = np.divmod(np.arange(self.n_patches), self.ny)
        return np.column_stack([b.xmin + (ix + 0.5) * hx, b.ymin + (iy + 0.5) * hy])

    def patch_rect(self, patch: int) -> Rect:
        cx, cy = self.centers[patch]
        rx, ry = self.radius
        return Rect(xmin=cx - rx, ymin=cy - ry, xmax=cx + rx, ymax=cy + ry)

    def candidates(self, points: np.ndarray) -> np.ndarray:
        """Parches activos que pueden ser no nulos en cada punto (n, 4), -1 si falta"""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        b = self.bounds
        hx, hy = self.spacing
        px = _axis_pair(pts[:, 0], b.xmin, hx, self.nx)
        py = _axis_pair(pts[:, 1], b.ymin, hy, self.ny)
        ids = px[:, :, None] * self.ny + py[:, None, :]
        ids[(px[:, :, None] < 0) | (py[:, None, :] < 0)] = -1
        ids = ids.reshape(len(pts), SLOTS)
        inactive = (ids >= 0) & ~self.active[np.maximum(ids, 0)]
        ids[inactive] = -1
        return ids

    def weights(self, points: np.ndarray, ids: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Funciones de Shepard y sus gradientes

        Returns:
            (phi (n, 4), grad phi (n, 4, 2), máscara de puntos cubiertos (n,))
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        valid = ids >= 0
        c = self.centers[np.maximum(ids, 0)]
        rx, ry = self.radius
        ox, oy = self.overlap

        wx, dwx = _flat_top(pts[:, None, 0] - c[..., 0], rx, ox)
        wy, dwy = _flat_top(pts[:, None, 1] - c[..., 1], ry, oy)
        w = np.where(valid, wx * wy, 0.0)
        gx = np.where(valid, dwx * wy, 0.0)
        gy = np.where(valid, wx * dwy, 0.0)

        total = w.sum(axis=1)
        covered = total > 0.0
        W = np.where(covered, total, 1.0)[:, None]
        Wx = gx.sum(axis=1)[:, None]
        Wy = gy.sum(axis=1)[:, None]

        phi = w / W
        dphi = np.stack([
            (gx * W - w * Wx) / (W * W),
            (gy * W - w * Wy) / (W * W),
        ], axis=-1)
        return phi, dphi, covered

    def partition_sum(self, points: np.ndarray) -> np.ndarray:
        """Suma de las funciones de la partición en cada punto"""
        phi, _, _ = self.weights(points, self.candidates(points))
        return phi.sum(axis=1)


def build_cover(domain: DomainSpec, h_pum: float, alpha: float) -> Cover:
    """
    Construye la cubierta de parches de la viga

    Args:
        domain: Geometría de la viga
        h_pum: Paso nominal de la grilla de parches [m]
        alpha: Factor de estiramiento, 1 < alpha < 2

    Returns:
        Cubierta con los parches dentro de agujeros desactivados
    """
    if not h_pum > 0:
        raise InvalidParameterError("h_pum", h_pum)
    if not 1.0 < alpha < 2.0:
        raise InvalidParameterError("alpha", alpha, key="OUT_OF_RANGE")

    b = domain.bounds
    # Paso exacto cuando h divide la viga; el redondeo evita una columna extra
    nx = max(1, int(math.ceil(b.width / h_pum - 1e-9)))
    ny = max(1, int(math.ceil(b.height / h_pum - 1e-9)))
    cover = Cover(domain=domain, h=h_pum, alpha=alpha, nx=nx, ny=ny,
                  active=np.ones(nx * ny, dtype=bool))

    c = cover.centers
    rx, ry = cover.radius
    for hole in domain.holes:
        corners_inside = np.ones(len(c), dtype=bool)
        for sx in (-1.0, 1.0):
            for sy in (-1.0, 1.0):
                corners_inside &= hole.contains(c + np.array([sx * rx, sy * ry]))
        cover.active &= ~corners_inside

    logger.info(
        f"🧩 Cubierta PUM: {nx}x{ny} parches, alpha={alpha}, "
        f"{int((~cover.active).sum())} inactivos por agujeros"
    )
    return cover


# ═══════════════════════════════════════════════════════════
# ESPACIOS LOCALES Y ENRIQUECIMIENTO
# ═══════════════════════════════════════════════════════════

@dataclass(frozen=True)
class LocalSpace:
    """Base local de un parche: polinomios bilineales y enriquecimientos"""

    patch: int
    poly_basis: Tuple[str, ...] = POLY_BASIS
    enrichments: Tuple[str, ...] = ()


@dataclass
class PatchSpaces:
    """
    Espacios locales de todos los parches con numeración escalar de funciones

    La función escalar k del parche p tiene índice offsets[p] + k; sus grados
    de libertad vectoriales son 2s (ux) y 2s + 1 (uy).
    """

    cover: Cover
    crack: Optional[CrackPath]
    enriched: np.ndarray
    offsets: np.ndarray = field(init=False)

    def __post_init__(self):
        n_funcs = np.where(self.cover.active, N_POLY + self.enriched.astype(np.int64), 0)
        self.offsets = np.concatenate([[0], np.cumsum(n_funcs)]).astype(np.int64)

    @property
    def n_scalar(self) -> int:
        return int(self.offsets[-1])

    @property
    def n_dofs(self) -> int:
        return 2 * self.n_scalar

    @property
    def ramp_length(self) -> float:
        return self.cover.h

    def local(self, patch: int) -> LocalSpace:
        extra = ("step",) if self.enriched[patch] else ()
        return LocalSpace(patch=patch, enrichments=extra)

    def enrichment(
        self,
        points: np.ndarray,
        side_hint: Optional[np.ndarray] = None
    ) -> Tuple[np.ndarray, np.ndarray]:
        """
        Escalón truncado en la punta: eta = lado * clip(s / h, 0, 1)

        s es la distancia a la punta a lo largo de la grieta, con la tangente
        del tramo más cercano a cada punto; delante del último tramo s < 0 y
        eta es idénticamente 0.

        Returns:
            (eta (n,), grad eta (n, 2))
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.crack is None:
            return np.zeros(len(pts)), np.zeros((len(pts), 2))

        polyline = self.crack.as_array()
        sign, dist = signed_side(pts, polyline)
        on_crack = dist < ON_CRACK_TOL
        if on_crack.any():
            hint = np.ones(len(pts)) if side_hint is None else np.broadcast_to(side_hint, (len(pts),))
            sign = np.where(on_crack, np.sign(hint), sign)
            sign = np.where(sign == 0.0, 1.0, sign)

        rho = self.ramp_length
        s, ds = distance_to_end_along(pts, polyline)
        w = np.clip(s / rho, 0.0, 1.0)
        ramp = (s > 0.0) & (s < rho)
        dw = np.where(ramp, 1.0 / rho, 0.0)[:, None] * ds
        return sign * w, sign[:, None] * dw


def enrich_cracked_patches(cover: Cover, crack: Optional[CrackPath]) -> PatchSpaces:
    """
    Asigna el enriquecimiento escalón a los parches cortados por la grieta

    Un parche se enriquece si el interior de su soporte intersecta la
    polilínea.

    Args:
        cover: Cubierta de parches
        crack: Trayectoria actual (None: sin enriquecimiento)

    Returns:
        Espacios locales de todos los parches
    """
    enriched = np.zeros(cover.n_patches, dtype=bool)
    if crack is not None:
        c = cover.centers
        rx, ry = cover.radius
        shrink = 1e-9 * cover.h
        boxes = shapely.box(
            c[:, 0] - rx + shrink, c[:, 1] - ry + shrink,
            c[:, 0] + rx - shrink, c[:, 1] + ry - shrink
        )
        enriched = shapely.intersects(boxes, crack.linestring()) & cover.active

    spaces = PatchSpaces(cover=cover, crack=crack, enriched=np.asarray(enriched, dtype=bool))
    logger.debug(f"Parches enriquecidos: {int(spaces.enriched.sum())}")
    return spaces


def scalar_basis(
    spaces: PatchSpaces,
    points: np.ndarray,
    ids: Optional[np.ndarray] = None,
    side_hint: Optional[np.ndarray] = None
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Funciones de forma escalares phi_i * (polinomio | escalón) en los puntos

    Returns:
        (índices escalares (n, 20) con -1 si no aplica, valores (n, 20),
         gradientes (n, 20, 2), máscara de puntos cubiertos (n,))
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    cover = spaces.cover
    if ids is None:
        ids = cover.candidates(pts)
    n = len(pts)
    phi, dphi, covered = cover.weights(pts, ids)
    valid = ids >= 0
    pid = np.maximum(ids, 0)

    c = cover.centers[pid]
    rx, ry = cover.radius
    xi = (pts[:, None, 0] - c[..., 0]) / rx
    et = (pts[:, None, 1] - c[..., 1]) / ry
    P = np.stack([np.ones_like(xi), xi, et, xi * et], axis=-1)
    dP = np.zeros(P.shape + (2,))
    dP[..., 1, 0] = 1.0 / rx
    dP[..., 2, 1] = 1.0 / ry
    dP[..., 3, 0] = et / rx
    dP[..., 3, 1] = xi / ry

    val_poly = phi[..., None] * P
    grad_poly = dphi[:, :, None, :] * P[..., None] + phi[:, :, None, None] * dP
    idx_poly = spaces.offsets[pid][..., None] + np.arange(N_POLY)
    idx_poly[~valid] = -1

    enr = valid & spaces.enriched[pid]
    idx_enr = np.where(enr, spaces.offsets[pid] + N_POLY, -1)
    val_enr = np.zeros((n, SLOTS))
    grad_enr = np.zeros((n, SLOTS, 2))
    if enr.any():
        eta, deta = spaces.enrichment(pts, side_hint)
        val_enr = np.where(enr, phi * eta[:, None], 0.0)
        grad_enr = np.where(
            enr[..., None],
            dphi * eta[:, None, None] + phi[..., None] * deta[:, None, :],
            0.0
        )

    index = np.concatenate([idx_poly.reshape(n, -1), idx_enr], axis=1)
    values = np.concatenate([val_poly.reshape(n, -1), val_enr], axis=1)
    grads = np.concatenate([grad_poly.reshape(n, -1, 2), grad_enr], axis=1)
    values[index < 0] = 0.0
    grads[index < 0] = 0.0
    return index, values, grads, covered


def _vector_dofs(index: np.ndarray) -> np.ndarray:
    """Índices escalares (n, 20) -> grados de libertad (n, 40) intercalados ux, uy"""
    dofs = np.full((len(index), 2 * index.shape[1]), -1, dtype=np.int64)
    valid = index >= 0
    dofs[:, 0::2] = np.where(valid, 2 * index, -1)
    dofs[:, 1::2] = np.where(valid, 2 * index + 1, -1)
    return dofs


def _strain_matrix(grads: np.ndarray) -> np.ndarray:
    """Matriz B (n, 3, 40) en notación de Voigt con deformación angular de ingeniería"""
    n, k, _ = grads.shape
    B = np.zeros((n, 3, 2 * k))
    B[:, 0, 0::2] = grads[..., 0]
    B[:, 1, 1::2] = grads[..., 1]
    B[:, 2, 0::2] = grads[..., 1]
    B[:, 2, 1::2] = grads[..., 0]
    return B


def _value_matrix(values: np.ndarray) -> np.ndarray:
    """Matriz N (n, 2, 40) que interpola el desplazamiento"""
    n, k = values.shape
    N = np.zeros((n, 2, 2 * k))
    N[:, 0, 0::2] = values
    N[:, 1, 1::2] = values
    return N


# ═══════════════════════════════════════════════════════════
# CONDICIONES DE BORDE
# ═══════════════════════════════════════════════════════════

@dataclass(frozen=True)
class PointSupport:
    """Apoyo puntual penalizado"""

    point: Point
    fix_x: bool
    fix_y: bool


@dataclass(frozen=True)
class TractionStrip:
    """
    Carga distribuida en una franja del borde superior

    force es la fuerza total de referencia [N]; se reparte por unidad de
    espesor sobre el ancho de la franja y apunta hacia abajo.
    """

    center: Point
    width: float
    force: float
    thickness: float

    @property
    def traction(self) -> float:
        return -self.force / (self.thickness * self.width)


@dataclass
class BoundaryConditions:
    """Apoyos, datos de Dirichlet sobre el contorno exterior y carga"""

    supports: Tuple[PointSupport, ...] = ()
    penalty_factor: float = 1e6
    dirichlet: Optional[Callable[[np.ndarray], np.ndarray]] = None
    nitsche_factor: float = 100.0
    load: Optional[TractionStrip] = None


def beam_boundary_conditions(
    domain: DomainSpec,
    force: float,
    h_pum: float,
    supports: str = "pin-roller",
    penalty_factor: float = 1e6
) -> BoundaryConditions:
    """
    Condiciones de la flexión en tres puntos

    Apoyo fijo a la izquierda y deslizante (solo vertical) a la derecha, o
    ambos fijos con supports="pin-pin". La carga es una franja de ancho
    2 * h_pum centrada en el punto de carga.
    """
    left, right = domain.supports
    right_fix_x = supports == "pin-pin"
    return BoundaryConditions(
        supports=(
            PointSupport(point=left, fix_x=True, fix_y=True),
            PointSupport(point=right, fix_x=right_fix_x, fix_y=True),
        ),
        penalty_factor=penalty_factor,
        load=TractionStrip(
            center=domain.load_point, width=2.0 * h_pum,
            force=force, thickness=domain.thickness
        ),
    )


# ═══════════════════════════════════════════════════════════
# CUADRATURA
# ═══════════════════════════════════════════════════════════

@dataclass
class Quadrature:
    """Puntos de Gauss agrupados por celda padre (ordenados por celda)"""

    points: np.ndarray
    weights: np.ndarray
    cell: np.ndarray
    cell_ids: np.ndarray

    @property
    def n_cells(self) -> int:
        return len(self.cell_ids)

    def cell_starts(self) -> np.ndarray:
        return np.searchsorted(self.cell, np.arange(self.n_cells + 1))


def _breakpoints(lo: float, hi: float, centers: np.ndarray, radius: float, overlap: float) -> np.ndarray:
    """Bordes de soportes y núcleos dentro de [lo, hi], fusionando casi duplicados"""
    tol = 1e-9 * (hi - lo)
    core = radius - overlap
    cand = np.concatenate([centers - radius, centers + radius, centers - core, centers + core])
    cand = np.sort(cand[(cand > lo + tol) & (cand < hi - tol)])
    if len(cand):
        cand = cand[np.concatenate([[True], np.diff(cand) > tol])]
    return np.concatenate([[lo], cand, [hi]])


def _gauss_rects(rects: np.ndarray, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Regla tensorial de Gauss en m rectángulos (m, 4) -> puntos (m*n², 2) y pesos"""
    g, gw = np.polynomial.legendre.leggauss(order)
    w = rects[:, 2] - rects[:, 0]
    hgt = rects[:, 3] - rects[:, 1]
    xs = rects[:, 0, None] + 0.5 * (g + 1.0) * w[:, None]
    ys = rects[:, 1, None] + 0.5 * (g + 1.0) * hgt[:, None]
    X = np.broadcast_to(xs[:, :, None], (len(rects), order, order))
    Y = np.broadcast_to(ys[:, None, :], (len(rects), order, order))
    W = (0.5 * gw * w[:, None])[:, :, None] * (0.5 * gw * hgt[:, None])[:, None, :]
    return np.column_stack([X.ravel(), Y.ravel()]), W.ravel()


def _circle_state(rects: np.ndarray, center: Point, radius: float) -> Tuple[np.ndarray, np.ndarray]:
    """(rectángulo dentro del círculo, borde del círculo atraviesa el rectángulo)"""
    cx, cy = center
    nx = np.clip(cx, rects[:, 0], rects[:, 2])
    ny = np.clip(cy, rects[:, 1], rects[:, 3])
    touches = np.hypot(nx - cx, ny - cy) < radius
    far_x = np.maximum(np.abs(rects[:, 0] - cx), np.abs(rects[:, 2] - cx))
    far_y = np.maximum(np.abs(rects[:, 1] - cy), np.abs(rects[:, 3] - cy))
    inside = np.hypot(far_x, far_y) < radius
    return inside, touches & ~inside


def _crack_cuts(rects: np.ndarray, crack_line, scale: float) -> np.ndarray:
    if crack_line is None or len(rects) == 0:
        return np.zeros(len(rects), dtype=bool)
    shrink = 1e-9 * scale
    boxes = shapely.box(rects[:, 0] + shrink, rects[:, 1] + shrink,
                        rects[:, 2] - shrink, rects[:, 3] - shrink)
    return np.asarray(shapely.intersects(boxes, crack_line), dtype=bool)


def build_quadrature(
    cover: Cover,
    crack: Optional[CrackPath],
    order: int = 4,
    max_subdivision: int = 6
) -> Quadrature:
    """
    Celdas de integración alineadas con bordes de soporte y de núcleo

    Las celdas cortadas por la grieta o por el borde de un agujero se
    subdividen en quadtree hasta max_subdivision niveles; los puntos dentro
    de agujeros se descartan.
    """
    domain = cover.domain
    b = cover.bounds
    c = cover.centers
    rx, ry = cover.radius
    ox, oy = cover.overlap
    bx = _breakpoints(b.xmin, b.xmax, np.unique(c[:, 0]), rx, ox)
    by = _breakpoints(b.ymin, b.ymax, np.unique(c[:, 1]), ry, oy)

    X0, Y0 = np.meshgrid(bx[:-1], by[:-1], indexing="ij")
    X1, Y1 = np.meshgrid(bx[1:], by[1:], indexing="ij")
    cells = np.column_stack([X0.ravel(), Y0.ravel(), X1.ravel(), Y1.ravel()])

    dropped = np.zeros(len(cells), dtype=bool)
    cut = np.zeros(len(cells), dtype=bool)
    for hole in domain.holes:
        inside, boundary = _circle_state(cells, hole.center, hole.radius)
        dropped |= inside
        cut |= boundary
    crack_line = crack.linestring() if crack is not None else None
    cut |= _crack_cuts(cells, crack_line, cover.h)
    cut &= ~dropped

    regular = ~dropped & ~cut
    reg_idx = np.flatnonzero(regular)
    reg_pts, reg_w = _gauss_rects(cells[reg_idx], order)
    reg_cell = np.repeat(reg_idx, order * order)

    leaves: List[np.ndarray] = []
    leaf_cell: List[int] = []

    def subdividir(rect: np.ndarray, parent: int, depth: int) -> None:
        r = rect[None, :]
        for hole in domain.holes:
            inside, _ = _circle_state(r, hole.center, hole.radius)
            if inside[0]:
                return
        if depth < max_subdivision:
            partido = _crack_cuts(r, crack_line, cover.h)[0]
            for hole in domain.holes:
                partido |= bool(_circle_state(r, hole.center, hole.radius)[1][0])
            if partido:
                xm, ym = 0.5 * (rect[0] + rect[2]), 0.5 * (rect[1] + rect[3])
                for hijo in (
                    (rect[0], rect[1], xm, ym), (xm, rect[1], rect[2], ym),
                    (rect[0], ym, xm, rect[3]), (xm, ym, rect[2], rect[3]),
                ):
                    subdividir(np.array(hijo), parent, depth + 1)
                return
        leaves.append(rect)
        leaf_cell.append(parent)

    for k in np.flatnonzero(cut):
        subdividir(cells[k], int(k), 0)

    if leaves:
        cut_pts, cut_w = _gauss_rects(np.array(leaves), order)
        cut_cell = np.repeat(np.array(leaf_cell, dtype=np.int64), order * order)
        material = np.ones(len(cut_pts), dtype=bool)
        for hole in domain.holes:
            material &= ~hole.contains(cut_pts)
        cut_pts, cut_w, cut_cell = cut_pts[material], cut_w[material], cut_cell[material]
    else:
        cut_pts, cut_w, cut_cell = np.zeros((0, 2)), np.zeros(0), np.zeros(0, dtype=np.int64)

    points = np.concatenate([reg_pts, cut_pts])
    weights = np.concatenate([reg_w, cut_w])
    cell = np.concatenate([reg_cell, cut_cell])

    # Renumeración compacta de las celdas con puntos
    used, cell = np.unique(cell, return_inverse=True)
    order_idx = np.argsort(cell, kind="stable")
    centers = np.column_stack([
        0.5 * (cells[used, 0] + cells[used, 2]),
        0.5 * (cells[used, 1] + cells[used, 3]),
    ])

    logger.debug(
        f"Cuadratura: {len(used)} celdas, {int(cut.sum())} subdivididas, "
        f"{len(points)} puntos"
    )
    return Quadrature(
        points=points[order_idx],
        weights=weights[order_idx],
        cell=cell[order_idx],
        cell_ids=cover.candidates(centers),
    )


def _edge_points(lo: float, hi: float, breaks: np.ndarray, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss 1D en [lo, hi] partido en los bordes de soporte"""
    cuts = breaks[(breaks > lo) & (breaks < hi)]
    nodes = np.concatenate([[lo], cuts, [hi]])
    g, gw = np.polynomial.legendre.leggauss(order)
    a, length = nodes[:-1], np.diff(nodes)
    s = a[:, None] + 0.5 * (g + 1.0) * length[:, None]
    w = 0.5 * gw * length[:, None]
    return s.ravel(), w.ravel()


def _boundary_points(cover: Cover, order: int):
    """Puntos de Gauss del contorno exterior con su normal saliente"""
    b = cover.bounds
    c = cover.centers
    rx, ry = cover.radius
    ox, oy = cover.overlap
    bx = _breakpoints(b.xmin, b.xmax, np.unique(c[:, 0]), rx, ox)
    by = _breakpoints(b.ymin, b.ymax, np.unique(c[:, 1]), ry, oy)
    sx, wx = _edge_points(b.xmin, b.xmax, bx, order)
    sy, wy = _edge_points(b.ymin, b.ymax, by, order)
    return [
        (np.column_stack([sx, np.full_like(sx, b.ymin)]), wx, np.array([0.0, -1.0])),
        (np.column_stack([sx, np.full_like(sx, b.ymax)]), wx, np.array([0.0, 1.0])),
        (np.column_stack([np.full_like(sy, b.xmin), sy]), wy, np.array([-1.0, 0.0])),
        (np.column_stack([np.full_like(sy, b.xmax), sy]), wy, np.array([1.0, 0.0])),
    ]


# ═══════════════════════════════════════════════════════════
# ENSAMBLAJE
# ═══════════════════════════════════════════════════════════

def _to_csr(dofs: np.ndarray, mats: np.ndarray, n: int) -> sparse.csr_matrix:
    rows = np.broadcast_to(dofs[:, :, None], mats.shape)
    cols = np.broadcast_to(dofs[:, None, :], mats.shape)
    mask = (rows >= 0) & (cols >= 0)
    return sparse.coo_matrix((mats[mask], (rows[mask], cols[mask])), shape=(n, n)).tocsr()


def _cell_chunk(
    spaces: PatchSpaces,
    quad: Quadrature,
    starts: np.ndarray,
    D: np.ndarray,
    lo: int,
    hi: int
) -> sparse.csr_matrix:
    """Rigidez de las celdas [lo, hi) reducida por celda"""
    p0, p1 = starts[lo], starts[hi]
    pts = quad.points[p0:p1]
    ids = quad.cell_ids[quad.cell[p0:p1]]
    index, _, grads, _ = scalar_basis(spaces, pts, ids)
    B = _strain_matrix(grads)
    DB = np.einsum("ij,njb->nib", D, B) * quad.weights[p0:p1, None, None]
    local = np.einsum("nia,nib->nab", B, DB)

    first = starts[lo:hi] - p0
    nonempty = starts[lo + 1:hi + 1] > starts[lo:hi]
    first = first[nonempty]
    per_cell = np.add.reduceat(local, first, axis=0)
    dofs = _vector_dofs(index[first])
    return _to_csr(dofs, per_cell, spaces.n_dofs)


def rigid_body_modes(spaces: PatchSpaces) -> np.ndarray:
    """
    Coeficientes de las traslaciones ux, uy y la rotación (-y, x)

    Returns:
        Arreglo (3, n_dofs)
    """
    cover = spaces.cover
    c = cover.centers
    rx, ry = cover.radius
    act = np.flatnonzero(cover.active)
    s0 = spaces.offsets[act]
    modes = np.zeros((3, spaces.n_dofs))
    modes[0, 2 * s0] = 1.0
    modes[1, 2 * s0 + 1] = 1.0
    modes[2, 2 * s0] = -c[act, 1]
    modes[2, 2 * (s0 + 2)] = -ry
    modes[2, 2 * s0 + 1] = c[act, 0]
    modes[2, 2 * (s0 + 1) + 1] = rx
    return modes


def free_rigid_modes(K: sparse.spmatrix, spaces: PatchSpaces) -> int:
    """Dimensión del subespacio de movimientos rígidos sin restringir"""
    R = rigid_body_modes(spaces).T
    R = R / np.linalg.norm(R, axis=0)
    G = R.T @ (K @ R)
    eig = np.linalg.eigvalsh(0.5 * (G + G.T))
    scale = float(np.abs(K.diagonal()).max()) if K.nnz else 1.0
    return int(np.sum(eig <= RIGID_TOL * scale))


@dataclass
class GlobalSystem:
    """Sistema ensamblado y factorizado para una grieta dada; lineal en la carga"""

    spaces: PatchSpaces
    stiffness: sparse.csr_matrix
    rhs: np.ndarray
    factor: object

    def solve(self, load_factor: float, load_scale: float = 1.0) -> "GlobalSolution":
        """Solución para load_factor en [0, 1] de la carga de referencia por load_scale"""
        if not 0.0 <= load_factor <= 1.0:
            raise InvalidParameterError("load_factor", load_factor, key="OUT_OF_RANGE")
        if not load_scale > 0:
            raise InvalidParameterError("load_scale", load_scale)
        coef = self.factor.solve((load_factor * load_scale) * self.rhs)
        if not np.all(np.isfinite(coef)):
            raise AssemblyError(nullity=-1)
        return GlobalSolution(spaces=self.spaces, coefficients=coef, load_factor=load_factor)


def assemble_stiffness(
    cover: Cover,
    spaces: PatchSpaces,
    material: MaterialParams,
    gauss_order: int = 4,
    max_subdivision: int = 6,
    executor: Optional[Executor] = None
) -> sparse.csr_matrix:
    """Matriz de Galerkin del volumen, sin apoyos ni términos de contorno"""
    D = plane_strain_matrix(material)
    n = spaces.n_dofs

    quad = build_quadrature(cover, spaces.crack, gauss_order, max_subdivision)
    starts = quad.cell_starts()
    chunks = [(lo, min(lo + CELLS_PER_CHUNK, quad.n_cells))
              for lo in range(0, quad.n_cells, CELLS_PER_CHUNK)]

    def tramo(chunk):
        return _cell_chunk(spaces, quad, starts, D, *chunk)

    partes = list(executor.map(tramo, chunks)) if executor is not None else [tramo(c) for c in chunks]
    K = sparse.csr_matrix((n, n))
    for parte in partes:
        K = K + parte
    return K


def assemble_system(
    cover: Cover,
    spaces: PatchSpaces,
    material: MaterialParams,
    bcs: BoundaryConditions,
    gauss_order: int = 4,
    max_subdivision: int = 6,
    executor: Optional[Executor] = None
) -> GlobalSystem:
    """
    Ensambla y factoriza la forma débil de deformación plana

    El vector de cargas corresponde a load_factor = 1; los datos de
    Dirichlet (Nitsche) se escalan con la carga.

    Raises:
        AssemblyError: Si quedan modos rígidos libres o la factorización falla
    """
    D = plane_strain_matrix(material)
    n = spaces.n_dofs
    h = cover.h

    K = assemble_stiffness(cover, spaces, material, gauss_order, max_subdivision, executor)
    f = np.zeros(n)

    # Nitsche simétrico sobre el contorno exterior
    if bcs.dirichlet is not None:
        gamma = bcs.nitsche_factor * material.E / h
        for pts, w, normal in _boundary_points(cover, gauss_order):
            index, values, grads, _ = scalar_basis(spaces, pts)
            dofs = _vector_dofs(index)
            N = _value_matrix(values)
            nx, ny = normal
            Nn = np.array([[nx, 0.0, ny], [0.0, ny, nx]])
            T = np.einsum("ij,jk,nkb->nib", Nn, D, _strain_matrix(grads))
            NtT = np.einsum("nia,nib->nab", N, T)
            mats = w[:, None, None] * (
                gamma * np.einsum("nia,nib->nab", N, N) - NtT - NtT.transpose(0, 2, 1)
            )
            K = K + _to_csr(dofs, mats, n)
            g = np.asarray(bcs.dirichlet(pts), dtype=float).reshape(len(pts), 2)
            rhs = w[:, None] * (gamma * np.einsum("nia,ni->na", N, g) - np.einsum("nia,ni->na", T, g))
            valid = dofs >= 0
            f += np.bincount(dofs[valid], weights=rhs[valid], minlength=n)

    # Apoyos puntuales por penalización
    if bcs.supports:
        penalty = bcs.penalty_factor * material.E / h
        pts = np.array([s.point for s in bcs.supports], dtype=float)
        index, values, _, _ = scalar_basis(spaces, pts)
        dofs = _vector_dofs(index)
        N = _value_matrix(values)
        fixed = np.array([[s.fix_x, s.fix_y] for s in bcs.supports], dtype=float)
        Nf = N * fixed[:, :, None]
        mats = penalty * np.einsum("nia,nib->nab", Nf, Nf)
        K = K + _to_csr(dofs, mats, n)

    # Tracción en franja
    if bcs.load is not None:
        strip = bcs.load
        b = cover.bounds
        lo = max(b.xmin, strip.center[0] - strip.width / 2)
        hi = min(b.xmax, strip.center[0] + strip.width / 2)
        c = cover.centers
        rx, _ = cover.radius
        ox, _ = cover.overlap
        s, w = _edge_points(lo, hi, _breakpoints(b.xmin, b.xmax, np.unique(c[:, 0]), rx, ox), gauss_order)
        pts = np.column_stack([s, np.full_like(s, strip.center[1])])
        index, values, _, _ = scalar_basis(spaces, pts)
        dofs = _vector_dofs(index)
        rhs = np.zeros(dofs.shape)
        rhs[:, 1::2] = w[:, None] * strip.traction * values
        valid = dofs >= 0
        f += np.bincount(dofs[valid], weights=rhs[valid], minlength=n)

    K = (0.5 * (K + K.T)).tocsr()

    nullity = free_rigid_modes(K, spaces)
    if nullity > 0:
        logger.error(f"❌ {nullity} modos rígidos sin restringir")
        raise AssemblyError(nullity=nullity)

    diag = K.diagonal()
    positive = diag[diag > 0]
    median = float(np.median(positive)) if positive.size else 1.0
    tiny = diag < DIAGONAL_TOL * median
    if tiny.any():
        logger.warning(f"⚠️ {int(tiny.sum())} grados de libertad sin rigidez: regularizados")
        K = (K + sparse.diags(np.where(tiny, median, 0.0))).tocsr()

    try:
        factor = splu(K.tocsc())
    except RuntimeError as exc:
        logger.error(f"❌ Factorización fallida: {exc}")
        raise AssemblyError(nullity=max(1, int(tiny.sum()))) from exc

    logger.info(
        f"🧮 Sistema global: {n} gdl, {K.nnz} no nulos, "
        f"{int(spaces.enriched.sum())} parches enriquecidos"
    )
    return GlobalSystem(spaces=spaces, stiffness=K, rhs=f, factor=factor)


# ═══════════════════════════════════════════════════════════
# SOLUCIÓN Y EVALUACIÓN
# ═══════════════════════════════════════════════════════════

@dataclass
class GlobalSolution:
    """Coeficientes de la solución PUM para una grieta y un factor de carga"""

    spaces: PatchSpaces
    coefficients: np.ndarray
    load_factor: float

    @property
    def crack(self) -> Optional[CrackPath]:
        return self.spaces.crack

    @property
    def domain(self) -> DomainSpec:
        return self.spaces.cover.domain


def assemble_and_solve(
    cover: Cover,
    spaces: PatchSpaces,
    material: MaterialParams,
    bcs: BoundaryConditions,
    load_factor: float,
    gauss_order: int = 4,
    max_subdivision: int = 6,
    executor: Optional[Executor] = None
) -> GlobalSolution:
    """
    Resuelve el problema global para un factor de carga

    Args:
        cover: Cubierta de parches
        spaces: Espacios locales (con o sin enriquecimiento)
        material: Parámetros del material
        bcs: Condiciones de borde y carga de referencia
        load_factor: Fracción de la carga, en [0, 1]

    Returns:
        Solución global

    Raises:
        AssemblyError: Sistema singular
    """
    if not 0.0 <= load_factor <= 1.0:
        raise InvalidParameterError("load_factor", load_factor, key="OUT_OF_RANGE")
    system = assemble_system(cover, spaces, material, bcs, gauss_order, max_subdivision, executor)
    return system.solve(load_factor)


def evaluate_displacement(
    solution: GlobalSolution,
    points,
    side_hint: Optional[Sequence[float]] = None
) -> np.ndarray:
    """
    Desplazamiento u(x) = sum_i phi_i(x) (polinomio + escalón)

    Args:
        solution: Solución global
        points: Puntos (n, 2) dentro de la viga
        side_hint: Lado (+1 / -1) para puntos a menos de 1e-12 m de la grieta

    Returns:
        Desplazamientos (n, 2)

    Raises:
        OutOfDomainError: Punto fuera de la viga, sobre la grieta sin lado o
            fuera de todos los parches
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    domain = solution.domain
    inside = domain.contains(pts, tol=ON_CRACK_TOL)
    if not inside.all():
        k = int(np.argmin(inside))
        raise OutOfDomainError(float(pts[k, 0]), float(pts[k, 1]))

    hint = None
    if side_hint is not None:
        hint = np.broadcast_to(np.asarray(side_hint, dtype=float), (len(pts),))
    if solution.crack is not None:
        dist, _ = polyline_distance(pts, solution.crack.as_array())
        on_crack = dist < ON_CRACK_TOL
        if hint is not None:
            on_crack &= hint == 0.0
        if on_crack.any():
            k = int(np.argmax(on_crack))
            raise OutOfDomainError(float(pts[k, 0]), float(pts[k, 1]), key="ON_CRACK")

    index, values, _, covered = scalar_basis(solution.spaces, pts, side_hint=hint)
    if not covered.all():
        k = int(np.argmin(covered))
        raise OutOfDomainError(float(pts[k, 0]), float(pts[k, 1]), key="NOT_COVERED")

    coef = solution.coefficients
    valid = index >= 0
    safe = np.where(valid, index, 0)
    ux = np.sum(np.where(valid, values * coef[2 * safe], 0.0), axis=1)
    uy = np.sum(np.where(valid, values * coef[2 * safe + 1], 0.0), axis=1)
    return np.column_stack([ux, uy])


def sample_displacement(solution: GlobalSolution, spacing: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Muestrea el desplazamiento en centros de una grilla regular de la viga

    Se omiten puntos en agujeros o sobre la grieta.

    Returns:
        (puntos (n, 2), desplazamientos (n, 2))
    """
    b = solution.domain.bounds
    xs = np.arange(b.xmin + spacing / 2, b.xmax, spacing)
    ys = np.arange(b.ymin + spacing / 2, b.ymax, spacing)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    keep = solution.domain.contains(pts, tol=0.0)
    if solution.crack is not None:
        dist, _ = polyline_distance(pts, solution.crack.as_array())
        keep &= dist >= ON_CRACK_TOL
    pts = pts[keep]
    return pts, evaluate_displacement(solution, pts)
