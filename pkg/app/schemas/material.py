"""
Schemas Pydantic del material y del modelo peridinámico
Constantes elásticas, horizonte y enlaces
"""

import math
from typing import Tuple

import numpy as np
from pydantic import BaseModel, Field, ConfigDict, model_validator, computed_field

from app.exceptions import DegenerateBondError


# Poisson fijo de la peridinámica bond-based en deformación plana
BOND_BASED_POISSON = 1.0 / 3.0

# Tolerancia relativa para comparar constantes derivadas
_DERIVED_RTOL = 1e-12


# ═══════════════════════════════════════════════════════════
# MATERIAL
# ═══════════════════════════════════════════════════════════

class MaterialParams(BaseModel):
    """
    Constantes de material ya derivadas

    Se construye con app.services.material.build_material, que calcula
    C, beta y las constantes de Lamé a partir de E, Gc y rho.
    """

    model_config = ConfigDict(frozen=True)

    E: float = Field(..., gt=0, description="Módulo de Young [Pa]", examples=[3.2e9])
    nu: float = Field(BOND_BASED_POISSON, description="Coeficiente de Poisson (fijo en 1/3)")
    Gc: float = Field(..., gt=0, description="Energía de fractura [J/m²]", examples=[300.0])
    rho: float = Field(..., gt=0, description="Densidad [kg/m³]", examples=[1190.0])
    C: float = Field(..., gt=0, description="Altura del potencial de doble pozo")
    beta: float = Field(..., gt=0, description="Rigidez del potencial de doble pozo")
    lame_lambda: float = Field(..., gt=0, description="Primer parámetro de Lamé [Pa]")
    lame_mu: float = Field(..., gt=0, description="Módulo de corte [Pa]")

    @model_validator(mode="after")
    def validar_constantes_derivadas(self) -> "MaterialParams":
        """Verifica nu = 1/3 y la coherencia de C, beta, lambda y mu"""
        if self.nu != BOND_BASED_POISSON:
            raise ValueError(f"nu debe ser exactamente 1/3 (recibido {self.nu})")

        esperados = {
            "C": math.pi * self.Gc / 4.0,
            "beta": 6.0 * self.E / (math.pi * self.Gc / 4.0),
            "lame_lambda": self.E * self.nu / ((1 + self.nu) * (1 - 2 * self.nu)),
            "lame_mu": self.E / (2 * (1 + self.nu)),
        }
        for nombre, esperado in esperados.items():
            valor = getattr(self, nombre)
            if abs(valor - esperado) > _DERIVED_RTOL * abs(esperado):
                raise ValueError(f"{nombre} inconsistente con E y Gc ({valor} != {esperado})")

        return self


# ═══════════════════════════════════════════════════════════
# HORIZONTE
# ═══════════════════════════════════════════════════════════

class HorizonGeometry(BaseModel):
    """Horizonte peridinámico (disco de radio delta)"""

    model_config = ConfigDict(frozen=True)

    delta: float = Field(..., gt=0, description="Radio del horizonte [m]")

    @computed_field
    @property
    def measure(self) -> float:
        """Área del disco de horizonte, pi * delta²"""
        return math.pi * self.delta ** 2


# ═══════════════════════════════════════════════════════════
# ENLACES
# ═══════════════════════════════════════════════════════════

class Bond(BaseModel):
    """
    Enlace entre dos nodos: vector de referencia, longitud y estado de
    ablandamiento (irreversible)
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    dx: Tuple[float, float] = Field(..., description="Vector de referencia x_j - x_i")
    length: float = Field(..., gt=0, description="Longitud de referencia |dx|")
    softened: bool = Field(False, description="El enlace superó la elongación crítica")

    @model_validator(mode="after")
    def validar_longitud(self) -> "Bond":
        norma = math.hypot(*self.dx)
        if abs(norma - self.length) > _DERIVED_RTOL * norma:
            raise ValueError(f"length ({self.length}) no coincide con |dx| ({norma})")
        return self

    @classmethod
    def from_vector(cls, dx, softened: bool = False) -> "Bond":
        """
        Crea un enlace a partir de su vector de referencia

        Raises:
            DegenerateBondError: si el vector es nulo
        """
        vector = np.asarray(dx, dtype=float)
        length = float(np.hypot(vector[0], vector[1]))
        if length == 0.0:
            raise DegenerateBondError()
        return cls(dx=(float(vector[0]), float(vector[1])), length=length, softened=softened)

    def reversed(self) -> "Bond":
        """Enlace en sentido opuesto (j -> i)"""
        return Bond(dx=(-self.dx[0], -self.dx[1]), length=self.length, softened=self.softened)
