"""
Schemas Pydantic del acoplamiento global-local
Calendario de carga, política de cajas PD y diagnóstico de corrida
"""

import math
from typing import List, Literal, Optional

from pydantic import BaseModel, Field, ConfigDict, model_validator

from app.schemas.geometry import CrackPath, PDBox


InnerScheme = Literal["single-pass", "scheme-B"]


# ═══════════════════════════════════════════════════════════
# CALENDARIO Y POLÍTICA DE CAJAS
# ═══════════════════════════════════════════════════════════

class CouplingSchedule(BaseModel):
    """Pasos de carga, frecuencia de intercambio y esquema interno"""

    model_config = ConfigDict(frozen=True)

    n_load_steps: int = Field(20, ge=1, description="Número de pasos de carga")
    exchange_every: int = Field(5, ge=1, description="Pasos de carga entre intercambios global-local")
    inner_scheme: InnerScheme = Field("single-pass", description="Esquema interno de propagación")
    inner_advance_tol: float = Field(..., gt=0, description="Avance mínimo de punta para iterar [m]")
    max_inner_iterations: int = Field(10, ge=1, description="Tope de iteraciones del esquema B")

    def is_exchange_step(self, step: int) -> bool:
        """True si el paso (1..n) dispara un intercambio"""
        return step % self.exchange_every == 0

    @property
    def n_exchange_steps(self) -> int:
        return self.n_load_steps // self.exchange_every


class BoxPolicy(BaseModel):
    """Reglas de creación, traslado y crecimiento de la caja PD"""

    model_config = ConfigDict(frozen=True)

    initial_size: float = Field(..., gt=0, description="Lado inicial de la caja [m]")
    margin: float = Field(..., gt=0, description="Holgura mínima punta-borde [m]")
    growth: float = Field(1.25, gt=1, description="Factor de crecimiento")
    max_size: float = Field(..., gt=0, description="Lado máximo de la caja [m]")
    h_pd: float = Field(..., gt=0, description="Espaciado de la red PD [m]")
    delta: float = Field(..., gt=0, description="Horizonte PD [m]")

    @model_validator(mode="after")
    def validar_politica(self) -> "BoxPolicy":
        if self.margin < 2 * self.delta * (1 - 1e-12):
            raise ValueError(f"margin ({self.margin}) debe ser >= 2*delta ({2 * self.delta})")
        if self.initial_size <= 2 * self.margin:
            raise ValueError("initial_size debe superar 2*margin")
        if self.max_size < self.initial_size:
            raise ValueError("max_size debe ser >= initial_size")
        return self


# ═══════════════════════════════════════════════════════════
# DIAGNÓSTICO
# ═══════════════════════════════════════════════════════════

class StepDiagnostics(BaseModel):
    """Una fila del diagnóstico por paso de carga"""

    step: int = Field(..., ge=1)
    load_factor: float = Field(..., ge=0, le=1)
    tip_x: float
    tip_y: float
    box_xmin: float = math.nan
    box_ymin: float = math.nan
    box_xmax: float = math.nan
    box_ymax: float = math.nan
    max_damage: float = Field(0.0, ge=0, le=1)
    local_solves: int = Field(0, ge=0, description="Resoluciones PD en este paso")

    @property
    def has_box(self) -> bool:
        return not math.isnan(self.box_xmin)


class RunReport(BaseModel):
    """Resultado de una corrida acoplada"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    final_crack: CrackPath
    initial_crack: CrackPath
    diagnostics: List[StepDiagnostics] = Field(default_factory=list)
    boxes: List[PDBox] = Field(default_factory=list)
    n_local_solves: int = 0
    n_exchange_steps: int = 0
    clipped_boxes: int = 0
    load_scale: float = Field(1.0, gt=0, description="Factor aplicado a la fuerza de referencia")
    reference_distance: Optional[float] = Field(None, description="Fréchet contra la referencia [m]")

    @property
    def grew(self) -> bool:
        return self.final_crack.arc_length > self.initial_crack.arc_length
