"""
Núcleos constitutivos del modelo peridinámico bond-based con ablandamiento

Potencial de doble pozo g(r) = C * (1 - exp(-beta * r)) evaluado en
r = |dx| * S², con S la elongación del enlace. Las funciones escalares
definen la semántica de referencia; las variantes *_array operan sobre
arreglos de enlaces y son las que usa el integrador.
"""

import math
import logging
from typing import Iterable

import numpy as np

from app.exceptions import DegenerateBondError, InvalidParameterError, UndefinedDamageError
from app.schemas.material import Bond, HorizonGeometry, MaterialParams

logger = logging.getLogger(__name__)


# ═══════════════════════════════════════════════════════════
# CINEMÁTICA DEL ENLACE
# ═══════════════════════════════════════════════════════════

def unit_bond_vector(dx) -> np.ndarray:
    """Dirección unitaria del enlace; error si el vector es nulo"""
    v = np.asarray(dx, dtype=float)
    norm = float(np.hypot(v[0], v[1]))
    if norm == 0.0:
        raise DegenerateBondError()
    return v / norm


def bond_stretch(dx, du) -> float:
    """
    Elongación S = (du / |dx|) · e_dx

    Args:
        dx: Vector de referencia x_j - x_i
        du: Diferencia de desplazamientos u_j - u_i
    """
    e = unit_bond_vector(dx)
    length = float(np.hypot(*np.asarray(dx, dtype=float)))
    du = np.asarray(du, dtype=float)
    return float(du[0] / length * e[0] + du[1] / length * e[1])


def influence(r: float, horizon: HorizonGeometry) -> int:
    """Función de influencia: 1 si 0 <= r < delta, 0 en otro caso"""
    if r < 0:
        raise InvalidParameterError("r", r, key="NEGATIVE_ARGUMENT")
    return 1 if r < horizon.delta else 0


# ═══════════════════════════════════════════════════════════
# POTENCIAL Y FUERZAS
# ═══════════════════════════════════════════════════════════

def double_well(r: float, C: float, beta: float) -> float:
    """g(r) = C * (1 - exp(-beta * r))"""
    if r < 0:
        raise InvalidParameterError("r", r, key="NEGATIVE_ARGUMENT")
    return C * -math.expm1(-beta * r)


def potential_derivative(
    bond: Bond,
    stretch: float,
    material: MaterialParams,
    horizon: HorizonGeometry
) -> float:
    """
    Derivada del potencial del enlace respecto de S

    d/dS [J * g(|dx| S²) / (delta * mu(B))] = J * 2 C beta |dx| S exp(-beta |dx| S²) / (delta * mu(B))
    """
    J = influence(bond.length, horizon)
    if J == 0:
        return 0.0
    L = bond.length
    C, beta = material.C, material.beta
    return 2.0 * C * beta * L * stretch * math.exp(-beta * L * stretch ** 2) / (
        horizon.delta * horizon.measure
    )


def pair_force_density(
    bond: Bond,
    du,
    material: MaterialParams,
    horizon: HorizonGeometry
) -> np.ndarray:
    """Fuerza de par f = (dpsi/dS / |dx|) * e_dx, antisimétrica en (dx, du)"""
    e = unit_bond_vector(bond.dx)
    S = bond_stretch(bond.dx, du)
    magnitude = potential_derivative(bond, S, material, horizon) / bond.length
    return magnitude * e


def critical_stretch(length: float, beta: float) -> float:
    """
    Elongación de fuerza máxima del enlace: S_c = 1 / sqrt(2 beta |dx|)

    Es el máximo de dpsi/dS (punto de inflexión del potencial en S), no un
    punto de inflexión de g.
    """
    if not length > 0:
        raise InvalidParameterError("length", length)
    if not beta > 0:
        raise InvalidParameterError("beta", beta)
    return 1.0 / math.sqrt(2.0 * beta * length)


def node_damage(bonds: Iterable[Bond]) -> float:
    """Fracción de enlaces ablandados del nodo"""
    bonds = list(bonds)
    if not bonds:
        raise UndefinedDamageError()
    return sum(1 for b in bonds if b.softened) / len(bonds)


# ═══════════════════════════════════════════════════════════
# VARIANTES VECTORIZADAS
# ═══════════════════════════════════════════════════════════

def bond_stretch_array(dx: np.ndarray, length: np.ndarray, du: np.ndarray) -> np.ndarray:
    """Elongaciones de un arreglo de enlaces (m, 2) -> (m,)"""
    return (du[:, 0] * dx[:, 0] + du[:, 1] * dx[:, 1]) / (length * length)


def critical_stretch_array(length: np.ndarray, beta: float) -> np.ndarray:
    return 1.0 / np.sqrt(2.0 * beta * length)


def pair_force_array(
    dx: np.ndarray,
    length: np.ndarray,
    stretch: np.ndarray,
    material: MaterialParams,
    horizon: HorizonGeometry
) -> np.ndarray:
    """
    Fuerzas de par de un arreglo de enlaces dentro del horizonte

    Args:
        dx: Vectores de referencia (m, 2)
        length: Longitudes (m,)
        stretch: Elongaciones (m,)

    Returns:
        Fuerzas por unidad de volumen al cuadrado (m, 2)
    """
    C, beta = material.C, material.beta
    coef = 2.0 * C * beta * stretch * np.exp(-beta * length * stretch * stretch) / (
        horizon.delta * horizon.measure * length
    )
    return coef[:, None] * dx


def stable_time_step(
    material: MaterialParams,
    horizon: HorizonGeometry,
    spacing: float
) -> float:
    """
    Paso de tiempo estable del integrador explícito para la red regular

    dt_c = sqrt(2 rho / sum_j V_j c / |xi_j|), con c = 2 C beta / (delta mu(B))
    la rigidez tangente del enlace en S = 0.
    """
    n = int(math.ceil(horizon.delta / spacing))
    offsets = np.arange(-n, n + 1) * spacing
    gx, gy = np.meshgrid(offsets, offsets, indexing="ij")
    r = np.hypot(gx, gy).ravel()
    r = r[(r > 0) & (r < horizon.delta)]
    if r.size == 0:
        raise InvalidParameterError("delta", horizon.delta)

    c = 2.0 * material.C * material.beta / (horizon.delta * horizon.measure)
    volume = spacing * spacing
    return math.sqrt(2.0 * material.rho / np.sum(volume * c / r))
