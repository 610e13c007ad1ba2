"""
Servicio de material
Mapas cerrados entre constantes de ingeniería y constantes de los modelos
(potencial de doble pozo peridinámico y elasticidad lineal en deformación plana)
"""

import math
import logging
from typing import Tuple

import numpy as np

from app.exceptions import InvalidParameterError
from app.schemas.material import BOND_BASED_POISSON, MaterialParams

logger = logging.getLogger(__name__)


# Material por defecto del benchmark (tipo PMMA, no es dato de la referencia)
BENCHMARK_E = 3.2e9
BENCHMARK_GC = 300.0
BENCHMARK_RHO = 1190.0


def _require_positive(field: str, value: float) -> None:
    if not (value > 0 and math.isfinite(value)):
        raise InvalidParameterError(field, value)


# ═══════════════════════════════════════════════════════════
# MAPAS DE PARÁMETROS
# ═══════════════════════════════════════════════════════════

def derive_pd_constants(E: float, Gc: float) -> Tuple[float, float]:
    """
    Constantes C y beta del potencial de doble pozo

    Args:
        E: Módulo de Young [Pa]
        Gc: Energía de fractura [J/m²]

    Returns:
        (C, beta) con C = pi*Gc/4 y beta = 4*E*nu/(C*(1-nu)*(1-2nu)), nu = 1/3
    """
    _require_positive("E", E)
    _require_positive("Gc", Gc)

    nu = BOND_BASED_POISSON
    C = math.pi * Gc / 4.0
    beta = 4.0 * E * nu / (C * (1.0 - nu) * (1.0 - 2.0 * nu))
    return C, beta


def lame_constants(E: float, nu: float) -> Tuple[float, float]:
    """
    Constantes de Lamé isotrópicas

    Returns:
        (lambda, mu)
    """
    _require_positive("E", E)
    if not (0.0 < nu < 0.5):
        raise InvalidParameterError("nu", nu, key="POISSON_RANGE")

    lam = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    mu = E / (2.0 * (1.0 + nu))
    return lam, mu


def recover_engineering(lam: float, mu: float) -> Tuple[float, float]:
    """Inversa de lame_constants: (lambda, mu) -> (E, nu)"""
    _require_positive("lambda", lam)
    _require_positive("mu", mu)
    E = mu * (3.0 * lam + 2.0 * mu) / (lam + mu)
    nu = lam / (2.0 * (lam + mu))
    return E, nu


def plane_strain_matrix(material: MaterialParams) -> np.ndarray:
    """Tensor elástico de deformación plana en notación de Voigt (xx, yy, xy)"""
    lam, mu = material.lame_lambda, material.lame_mu
    return np.array([
        [lam + 2 * mu, lam, 0.0],
        [lam, lam + 2 * mu, 0.0],
        [0.0, 0.0, mu],
    ])


# ═══════════════════════════════════════════════════════════
# CONSTRUCCIÓN DEL MATERIAL
# ═══════════════════════════════════════════════════════════

def build_material(
    E: float,
    Gc: float,
    rho: float,
    nu: float = BOND_BASED_POISSON
) -> MaterialParams:
    """
    Construye MaterialParams con todas las constantes derivadas

    Raises:
        InvalidParameterError: entradas no positivas o nu distinto de 1/3
    """
    _require_positive("rho", rho)
    if nu != BOND_BASED_POISSON:
        raise InvalidParameterError("nu", nu, key="POISSON_FIXED")

    C, beta = derive_pd_constants(E, Gc)
    lam, mu = lame_constants(E, nu)

    return MaterialParams(
        E=E, nu=nu, Gc=Gc, rho=rho,
        C=C, beta=beta, lame_lambda=lam, lame_mu=mu
    )


def benchmark_material() -> MaterialParams:
    """Material por defecto de los casos de la viga (tipo PMMA)"""
    return build_material(BENCHMARK_E, BENCHMARK_GC, BENCHMARK_RHO)
