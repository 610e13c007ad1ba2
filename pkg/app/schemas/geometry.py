"""
Schemas Pydantic de geometría
Rectángulos, agujeros, viga, casos de referencia, trayectorias de grieta y cajas PD

Coordenadas de viga: x desde el centro del claro, y desde la media altura, en metros.
"""

import math
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, ConfigDict, field_validator, model_validator
from shapely.geometry import LineString

from app.exceptions import CrackGeometryError


Point = Tuple[float, float]

# Tolerancia absoluta para decidir si un punto está sobre un borde [m]
EDGE_TOL = 1e-9


# ═══════════════════════════════════════════════════════════
# PRIMITIVAS
# ═══════════════════════════════════════════════════════════

class Rect(BaseModel):
    """Rectángulo alineado con los ejes"""

    model_config = ConfigDict(frozen=True)

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    @model_validator(mode="after")
    def validar_area(self) -> "Rect":
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValueError(
                f"Rectángulo degenerado: ({self.xmin}, {self.ymin}) - ({self.xmax}, {self.ymax})"
            )
        return self

    @classmethod
    def centered(cls, center: Point, width: float, height: float) -> "Rect":
        cx, cy = center
        return cls(
            xmin=cx - width / 2, ymin=cy - height / 2,
            xmax=cx + width / 2, ymax=cy + height / 2
        )

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    @property
    def center(self) -> Point:
        return (0.5 * (self.xmin + self.xmax), 0.5 * (self.ymin + self.ymax))

    def contains(self, points, tol: float = 0.0) -> np.ndarray:
        """Máscara de puntos dentro del rectángulo cerrado (con tolerancia)"""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return (
            (pts[:, 0] >= self.xmin - tol) & (pts[:, 0] <= self.xmax + tol)
            & (pts[:, 1] >= self.ymin - tol) & (pts[:, 1] <= self.ymax + tol)
        )

    def intersection(self, other: "Rect") -> Optional["Rect"]:
        xmin, ymin = max(self.xmin, other.xmin), max(self.ymin, other.ymin)
        xmax, ymax = min(self.xmax, other.xmax), min(self.ymax, other.ymax)
        if xmax <= xmin or ymax <= ymin:
            return None
        return Rect(xmin=xmin, ymin=ymin, xmax=xmax, ymax=ymax)

    def union(self, other: "Rect") -> "Rect":
        return Rect(
            xmin=min(self.xmin, other.xmin), ymin=min(self.ymin, other.ymin),
            xmax=max(self.xmax, other.xmax), ymax=max(self.ymax, other.ymax)
        )

    def translated(self, dx: float, dy: float) -> "Rect":
        return Rect(
            xmin=self.xmin + dx, ymin=self.ymin + dy,
            xmax=self.xmax + dx, ymax=self.ymax + dy
        )

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.xmin, self.ymin, self.xmax, self.ymax)


class Hole(BaseModel):
    """Agujero circular sin tracciones"""

    model_config = ConfigDict(frozen=True)

    center: Point = Field(..., description="Centro del agujero [m]")
    radius: float = Field(..., gt=0, description="Radio [m]")

    def contains(self, points) -> np.ndarray:
        """Máscara de puntos estrictamente dentro del agujero"""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        d = np.hypot(pts[:, 0] - self.center[0], pts[:, 1] - self.center[1])
        return d < self.radius

    def contains_rect(self, rect: Rect) -> bool:
        """True si el rectángulo queda completamente dentro del agujero"""
        esquinas = [
            (rect.xmin, rect.ymin), (rect.xmax, rect.ymin),
            (rect.xmax, rect.ymax), (rect.xmin, rect.ymax)
        ]
        return bool(self.contains(esquinas).all())

    def cuts_rect(self, rect: Rect) -> bool:
        """True si el borde del agujero atraviesa el rectángulo"""
        cx, cy = self.center
        # Distancia mínima del centro al rectángulo
        nx = min(max(cx, rect.xmin), rect.xmax)
        ny = min(max(cy, rect.ymin), rect.ymax)
        if math.hypot(cx - nx, cy - ny) >= self.radius:
            return False
        return not self.contains_rect(rect)


# ═══════════════════════════════════════════════════════════
# TRAYECTORIA DE GRIETA
# ═══════════════════════════════════════════════════════════

class CrackPath(BaseModel):
    """
    Polilínea ordenada de grieta

    El primer vértice es la boca (borde de la viga o trayectoria previa),
    el último es la punta. Sin vértices consecutivos repetidos y sin
    auto-intersecciones.
    """

    model_config = ConfigDict(frozen=True)

    points: Tuple[Point, ...] = Field(..., description="Vértices de la polilínea [m]")

    @field_validator("points")
    @classmethod
    def validar_polilinea(cls, v: Tuple[Point, ...]) -> Tuple[Point, ...]:
        if len(v) < 2:
            raise CrackGeometryError("TOO_FEW_POINTS")
        for a, b in zip(v[:-1], v[1:]):
            if a[0] == b[0] and a[1] == b[1]:
                raise CrackGeometryError("DUPLICATE_POINTS")
        if not LineString(v).is_simple:
            raise CrackGeometryError("SELF_INTERSECTION")
        return v

    @classmethod
    def from_array(cls, array) -> "CrackPath":
        pts = np.asarray(array, dtype=float).reshape(-1, 2)
        return cls(points=tuple((float(x), float(y)) for x, y in pts))

    @property
    def tip(self) -> Point:
        return self.points[-1]

    @property
    def mouth(self) -> Point:
        return self.points[0]

    @property
    def arc_length(self) -> float:
        return float(self.linestring().length)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)

    def linestring(self) -> LineString:
        return LineString(self.points)

    def tip_direction(self) -> np.ndarray:
        """Vector unitario del último segmento (hacia la punta)"""
        pts = self.as_array()
        d = pts[-1] - pts[-2]
        return d / np.hypot(d[0], d[1])


# ═══════════════════════════════════════════════════════════
# VIGA Y CASOS
# ═══════════════════════════════════════════════════════════

class DomainSpec(BaseModel):
    """Viga en flexión de tres puntos con agujeros y entalla inicial"""

    model_config = ConfigDict(frozen=True)

    length: float = Field(..., gt=0, description="Longitud de la viga [m]", examples=[0.508])
    height: float = Field(..., gt=0, description="Altura de la viga [m]", examples=[0.2032])
    support_inset: float = Field(..., ge=0, description="Distancia de cada apoyo al extremo [m]")
    thickness: float = Field(0.0254, gt=0, description="Espesor fuera del plano [m]")
    holes: List[Hole] = Field(default_factory=list, description="Agujeros sin tracciones")
    initial_crack: CrackPath = Field(..., description="Entalla inicial")

    @model_validator(mode="after")
    def validar_geometria(self) -> "DomainSpec":
        caja = self.bounds
        for hole in self.holes:
            cx, cy = hole.center
            if (cx - hole.radius < caja.xmin or cx + hole.radius > caja.xmax
                    or cy - hole.radius < caja.ymin or cy + hole.radius > caja.ymax):
                raise ValueError(f"El agujero en {hole.center} sale de la viga")

        if not caja.contains(self.initial_crack.as_array(), tol=EDGE_TOL).all():
            raise ValueError("La entalla inicial sale de la viga")
        if abs(self.initial_crack.mouth[1] - caja.ymin) > EDGE_TOL:
            raise ValueError("La entalla inicial debe nacer en el borde inferior")

        if self.support_inset >= self.length / 2:
            raise ValueError("Los apoyos deben quedar dentro de la viga")
        return self

    @property
    def bounds(self) -> Rect:
        return Rect(
            xmin=-self.length / 2, ymin=-self.height / 2,
            xmax=self.length / 2, ymax=self.height / 2
        )

    @property
    def supports(self) -> Tuple[Point, Point]:
        """Apoyos izquierdo y derecho sobre el borde inferior"""
        x = self.length / 2 - self.support_inset
        y = -self.height / 2
        return ((-x, y), (x, y))

    @property
    def load_point(self) -> Point:
        """Punto de carga en el centro del claro, borde superior"""
        return (0.0, self.height / 2)

    def contains(self, points, tol: float = EDGE_TOL) -> np.ndarray:
        """Máscara de puntos en el material (dentro de la viga, fuera de los agujeros)"""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        inside = self.bounds.contains(pts, tol=tol)
        for hole in self.holes:
            inside &= ~hole.contains(pts)
        return inside

    def physical_edges(self, rect: Rect) -> Tuple[bool, bool, bool, bool]:
        """Qué bordes de rect (xmin, ymin, xmax, ymax) coinciden con los de la viga"""
        caja = self.bounds
        return (
            abs(rect.xmin - caja.xmin) <= EDGE_TOL,
            abs(rect.ymin - caja.ymin) <= EDGE_TOL,
            abs(rect.xmax - caja.xmax) <= EDGE_TOL,
            abs(rect.ymax - caja.ymax) <= EDGE_TOL,
        )


class CaseSpec(BaseModel):
    """Parámetros de un caso de la viga de referencia (en pulgadas)"""

    model_config = ConfigDict(frozen=True)

    case_id: str = Field(..., description="Identificador del caso", examples=["I", "II", "III"])
    a: float = Field(..., gt=0, description="Profundidad de la entalla [in]")
    b: float = Field(..., ge=0, description="Distancia de la entalla al centro del claro [in]")
    n_holes: int = Field(..., ge=0, le=3, description="Número de agujeros")


# ═══════════════════════════════════════════════════════════
# CAJA PD
# ═══════════════════════════════════════════════════════════

class PDBox(BaseModel):
    """Subdominio rectangular resuelto con peridinámica"""

    model_config = ConfigDict(frozen=True)

    rect: Rect
    h_pd: float = Field(..., gt=0, description="Espaciado de la red PD [m]")
    layer_width: float = Field(..., gt=0, description="Ancho de la capa de borde (delta) [m]")
    clipped: bool = Field(False, description="La caja fue recortada por el borde de la viga")

    @model_validator(mode="after")
    def validar_tamano(self) -> "PDBox":
        if self.rect.width < self.h_pd or self.rect.height < self.h_pd:
            raise ValueError("La caja PD es menor que una celda de la red")
        return self

    def with_rect(self, rect: Rect, clipped: Optional[bool] = None) -> "PDBox":
        return PDBox(
            rect=rect, h_pd=self.h_pd, layer_width=self.layer_width,
            clipped=self.clipped if clipped is None else clipped
        )
