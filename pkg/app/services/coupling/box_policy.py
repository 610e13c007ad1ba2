"""
Creación y adaptación de la caja PD que sigue a la punta de la grieta
"""

import logging
from typing import Optional, Tuple

import numpy as np

from app.exceptions import OutOfDomainError
from app.schemas.coupling import BoxPolicy
from app.schemas.geometry import CrackPath, DomainSpec, PDBox, Point, Rect

logger = logging.getLogger(__name__)


def _clip(rect: Rect, domain: DomainSpec) -> Tuple[Rect, bool]:
    recortado = rect.intersection(domain.bounds)
    if recortado is None:
        raise OutOfDomainError(*rect.center)
    cambiado = recortado.as_tuple() != rect.as_tuple()
    return recortado, cambiado


def make_initial_box(crack: CrackPath, policy: BoxPolicy, domain: DomainSpec) -> PDBox:
    """
    Caja cuadrada de lado initial_size centrada en la punta, recortada a la viga

    Raises:
        OutOfDomainError: Si la punta está fuera de la viga
    """
    tip = crack.tip
    if not domain.contains([tip])[0]:
        raise OutOfDomainError(*tip)

    rect, clipped = _clip(Rect.centered(tip, policy.initial_size, policy.initial_size), domain)
    if clipped:
        logger.warning(f"⚠️  Caja inicial recortada al borde de la viga: {rect.as_tuple()}")
    return PDBox(rect=rect, h_pd=policy.h_pd, layer_width=policy.delta, clipped=clipped)


def _clearances(rect: Rect, tip: Point) -> np.ndarray:
    """Holguras (izquierda, abajo, derecha, arriba) de la punta a los bordes"""
    x, y = tip
    return np.array([x - rect.xmin, y - rect.ymin, rect.xmax - x, rect.ymax - y])


def _damage_spans(rect: Rect, positions: np.ndarray, damage: np.ndarray,
                  threshold: float, margin: float) -> bool:
    """True si la zona dañada llega a dos bordes opuestos de la caja"""
    dañados = positions[damage > threshold]
    if len(dañados) == 0:
        return False
    x, y = dañados[:, 0], dañados[:, 1]
    horizontal = (x <= rect.xmin + margin).any() and (x >= rect.xmax - margin).any()
    vertical = (y <= rect.ymin + margin).any() and (y >= rect.ymax - margin).any()
    return bool(horizontal or vertical)


def adapt_box(
    box: PDBox,
    crack: CrackPath,
    policy: BoxPolicy,
    domain: DomainSpec,
    previous_tip: Optional[Point] = None,
    positions: Optional[np.ndarray] = None,
    damage: Optional[np.ndarray] = None,
    threshold: float = 0.35,
) -> PDBox:
    """
    Traslada y agranda la caja para que siga a la punta

    - Crece por policy.growth (hasta max_size) si el daño de la última
      resolución toca dos bordes opuestos.
    - Si la holgura a algún borde no físico es menor que margin, se traslada
      en la dirección del avance de la punta hasta dejar 2 * margin delante;
      en cada eje con holgura insuficiente tras el traslado se centra la punta.
    - Siempre contiene la punta previa y la actual; se recorta a la viga.

    Returns:
        Nueva caja (clipped=True si hubo recorte)
    """
    rect = box.rect
    tip = np.asarray(crack.tip, dtype=float)
    margin = policy.margin

    if positions is not None and damage is not None and _damage_spans(rect, positions, damage, threshold, margin):
        lado_x = min(rect.width * policy.growth, policy.max_size)
        lado_y = min(rect.height * policy.growth, policy.max_size)
        if lado_x > rect.width or lado_y > rect.height:
            rect = Rect.centered(rect.center, max(lado_x, rect.width), max(lado_y, rect.height))
            logger.info(f"📦 Caja PD agrandada a {rect.width:.4g} x {rect.height:.4g} m")

    fisicos = np.array(domain.physical_edges(rect))
    holgura = _clearances(rect, tuple(tip))
    if np.any((holgura < margin) & ~fisicos):
        origen = np.asarray(previous_tip if previous_tip is not None else crack.points[-2], dtype=float)
        d = tip - origen
        norma = float(np.hypot(*d))
        d = d / norma if norma > 0 else crack.tip_direction()

        # Avance s a lo largo de d que deja 2*margin delante de la punta
        s = 0.0
        if d[0] > 0:
            s = max(s, (2 * margin - holgura[2]) / d[0])
        elif d[0] < 0:
            s = max(s, (2 * margin - holgura[0]) / -d[0])
        if d[1] > 0:
            s = max(s, (2 * margin - holgura[3]) / d[1])
        elif d[1] < 0:
            s = max(s, (2 * margin - holgura[1]) / -d[1])
        rect = rect.translated(s * d[0], s * d[1])

        # Corrección por eje
        holgura = _clearances(rect, tuple(tip))
        dx = dy = 0.0
        if min(holgura[0], holgura[2]) < margin:
            dx = tip[0] - rect.center[0]
        if min(holgura[1], holgura[3]) < margin:
            dy = tip[1] - rect.center[1]
        if dx or dy:
            rect = rect.translated(dx, dy)
        logger.info(f"📦 Caja PD trasladada a {tuple(round(v, 5) for v in rect.as_tuple())}")

    for punto in (previous_tip, crack.tip):
        if punto is not None and not rect.contains([punto])[0]:
            rect = rect.union(Rect.centered(punto, 2 * policy.h_pd, 2 * policy.h_pd))

    rect, clipped = _clip(rect, domain)
    if clipped:
        logger.warning(f"⚠️  Caja PD recortada al borde de la viga: {rect.as_tuple()}")
    return box.with_rect(rect, clipped=clipped)
