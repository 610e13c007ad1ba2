"""
Schemas Pydantic de la configuración de corrida (archivo INI)

Cada sección del INI es un modelo con extra="forbid": claves o secciones
desconocidas se rechazan y los errores se reportan como "seccion.clave".
Los valores por defecto reproducen los parámetros de discretización del
benchmark de flexión de tres puntos.
"""

from typing import Literal, Optional

from pydantic import BaseModel, Field, ConfigDict, model_validator

from app.schemas.coupling import BoxPolicy, CouplingSchedule, InnerScheme


# Espaciados del benchmark [m]
DEFAULT_H_PD = 0.00049609375
DEFAULT_H_PUM = 0.00396875

# Tolerancia relativa de la comprobación t_n * t_s == T
_RAMP_RTOL = 1e-9

_SECTION_CONFIG = ConfigDict(extra="forbid", frozen=True)


# ═══════════════════════════════════════════════════════════
# SECCIONES
# ═══════════════════════════════════════════════════════════

class CaseSection(BaseModel):
    """[case] Caso de la viga; a, b y n_holes solo aplican a 'custom'"""

    model_config = _SECTION_CONFIG

    case_id: Literal["I", "II", "III", "custom"] = "I"
    a: Optional[float] = Field(None, gt=0, description="Profundidad de entalla [in]")
    b: Optional[float] = Field(None, ge=0, description="Distancia de la entalla al centro [in]")
    n_holes: Optional[int] = Field(None, ge=0, le=3)

    @model_validator(mode="after")
    def validar_custom(self) -> "CaseSection":
        if self.case_id == "custom" and (self.a is None or self.b is None):
            raise ValueError("case_id = custom requiere a y b")
        return self


class MaterialSection(BaseModel):
    """[material] Constantes de ingeniería (valores tipo PMMA por defecto)"""

    model_config = _SECTION_CONFIG

    E: float = Field(3.2e9, gt=0, description="Módulo de Young [Pa]")
    Gc: float = Field(300.0, gt=0, description="Energía de fractura [J/m²]")
    rho: float = Field(1190.0, gt=0, description="Densidad [kg/m³]")
    nu: float = Field(1.0 / 3.0, gt=0, lt=0.5, description="Poisson (solo se admite 1/3)")
    thickness: float = Field(0.0254, gt=0, description="Espesor [m]")


class DiscretizationSection(BaseModel):
    """[discretization] Espaciados, horizonte, integración temporal y carga"""

    model_config = _SECTION_CONFIG

    h_pd: float = Field(DEFAULT_H_PD, gt=0, description="Espaciado PD [m]")
    h_pum: float = Field(DEFAULT_H_PUM, gt=0, description="Tamaño de parche PUM [m]")
    delta_factor: float = Field(8.0, gt=0, description="delta / h_pd")
    t_n: int = Field(50000, ge=1, description="Pasos de tiempo por resolución local")
    t_s: float = Field(2e-7, gt=0, description="Paso de tiempo [s]")
    final_time: Optional[float] = Field(None, gt=0, description="T declarado [s], debe valer t_n*t_s")
    force: float = Field(9e5, gt=0, description="Fuerza total aplicada [N]")
    load_scale: float = Field(1.0, gt=0, description="Factor fijo sobre force")
    target_stretch_ratio: Optional[float] = Field(
        None, gt=0, description="|S|/S_c junto a la punta inicial con la carga completa (calibra la escala)"
    )

    @model_validator(mode="after")
    def validar_tiempo_final(self) -> "DiscretizationSection":
        if self.final_time is not None:
            ramp = self.t_n * self.t_s
            if abs(ramp - self.final_time) > _RAMP_RTOL * self.final_time:
                raise ValueError(
                    f"t_n * t_s = {ramp} no coincide con final_time = {self.final_time}"
                )
        return self

    @model_validator(mode="after")
    def validar_escala(self) -> "DiscretizationSection":
        if self.target_stretch_ratio is not None and self.load_scale != 1.0:
            raise ValueError("load_scale y target_stretch_ratio son excluyentes")
        return self

    @property
    def delta(self) -> float:
        return self.delta_factor * self.h_pd

    @property
    def ramp_time(self) -> float:
        return self.t_n * self.t_s


class ScheduleSection(BaseModel):
    """[schedule] Pasos de carga y esquema de intercambio"""

    model_config = _SECTION_CONFIG

    n_load_steps: int = Field(20, ge=1)
    exchange_every: int = Field(5, ge=1)
    inner_scheme: InnerScheme = "single-pass"
    inner_advance_tol: Optional[float] = Field(None, gt=0, description="Por defecto h_pd [m]")
    max_inner_iterations: int = Field(10, ge=1)


class BoxSection(BaseModel):
    """[box] Política de la caja PD; los tamaños por defecto dependen de h_pd y delta"""

    model_config = _SECTION_CONFIG

    initial_size: Optional[float] = Field(None, gt=0, description="Por defecto 64*h_pd [m]")
    margin: Optional[float] = Field(None, gt=0, description="Por defecto 2*delta [m]")
    growth: float = Field(1.25, gt=1)
    max_size: Optional[float] = Field(None, gt=0, description="Por defecto 0.09 m")


class ExtractionSection(BaseModel):
    """[extraction] Umbral de daño y malla de remuestreo"""

    model_config = _SECTION_CONFIG

    damage_threshold: float = Field(0.35, gt=0, lt=1)
    grid_factor: float = Field(2.0, ge=1, description="Espaciado de la malla / h_pd")


class OutputSection(BaseModel):
    """[output] Resultados, instantáneas e hilos"""

    model_config = _SECTION_CONFIG

    output_dir: str = "resultados"
    snapshot_every: int = Field(0, ge=0, description="Pasos PD entre instantáneas (0 = sin)")
    field_spacing: Optional[float] = Field(
        None, gt=0, description="Malla del campo global x,y,ux,uy por paso de carga [m] (vacío = sin)"
    )
    workers: Optional[int] = Field(None, ge=1, description="Sobrescribe Settings.WORKERS")


class SolverSection(BaseModel):
    """[solver] Parámetros numéricos del solver global y del integrador PD"""

    model_config = _SECTION_CONFIG

    pu_alpha: float = Field(1.3, gt=1, lt=2, description="Factor de solape de los parches")
    gauss_order: int = Field(4, ge=1, le=10)
    max_subdivision: int = Field(6, ge=0, le=10)
    penalty_factor: float = Field(1e6, ge=0, description="Penalización de apoyos / (E/h_PUM)")
    supports: Literal["pin-roller", "pin-pin"] = "pin-roller"
    damping: float = Field(0.0, ge=0, description="Amortiguamiento proporcional a la masa [1/s]")


# ═══════════════════════════════════════════════════════════
# CONFIGURACIÓN COMPLETA
# ═══════════════════════════════════════════════════════════

class RunConfig(BaseModel):
    """Configuración validada de una corrida"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    case: CaseSection = Field(default_factory=CaseSection)
    material: MaterialSection = Field(default_factory=MaterialSection)
    discretization: DiscretizationSection = Field(default_factory=DiscretizationSection)
    schedule: ScheduleSection = Field(default_factory=ScheduleSection)
    box: BoxSection = Field(default_factory=BoxSection)
    extraction: ExtractionSection = Field(default_factory=ExtractionSection)
    output: OutputSection = Field(default_factory=OutputSection)
    solver: SolverSection = Field(default_factory=SolverSection)

    @model_validator(mode="after")
    def validar_politica_de_caja(self) -> "RunConfig":
        """El margen de la caja debe ser al menos 2*delta"""
        if self.box_margin < 2 * self.delta * (1 - 1e-12):
            raise ValueError(
                f"box.margin ({self.box_margin}) debe ser >= 2*delta ({2 * self.delta})"
            )
        if self.box_initial_size <= 2 * self.box_margin:
            raise ValueError("box.initial_size debe superar 2*box.margin")
        if self.box_max_size < self.box_initial_size:
            raise ValueError("box.max_size debe ser >= box.initial_size")
        return self

    # ───────────────────────────────────────────────────────
    # Valores efectivos
    # ───────────────────────────────────────────────────────

    @property
    def delta(self) -> float:
        return self.discretization.delta

    @property
    def ramp_time(self) -> float:
        return self.discretization.ramp_time

    @property
    def box_initial_size(self) -> float:
        if self.box.initial_size is not None:
            return self.box.initial_size
        return 64 * self.discretization.h_pd

    @property
    def box_margin(self) -> float:
        return self.box.margin if self.box.margin is not None else 2 * self.delta

    @property
    def box_max_size(self) -> float:
        if self.box.max_size is not None:
            return self.box.max_size
        return max(0.09, self.box_initial_size)

    @property
    def inner_advance_tol(self) -> float:
        tol = self.schedule.inner_advance_tol
        return tol if tol is not None else self.discretization.h_pd

    @property
    def grid_spacing(self) -> float:
        return self.extraction.grid_factor * self.discretization.h_pd

    def coupling_schedule(self) -> CouplingSchedule:
        return CouplingSchedule(
            n_load_steps=self.schedule.n_load_steps,
            exchange_every=self.schedule.exchange_every,
            inner_scheme=self.schedule.inner_scheme,
            inner_advance_tol=self.inner_advance_tol,
            max_inner_iterations=self.schedule.max_inner_iterations,
        )

    def box_policy(self) -> BoxPolicy:
        return BoxPolicy(
            initial_size=self.box_initial_size,
            margin=self.box_margin,
            growth=self.box.growth,
            max_size=self.box_max_size,
            h_pd=self.discretization.h_pd,
            delta=self.delta,
        )

    def describe(self) -> str:
        """Resumen de una línea para el log"""
        d = self.discretization
        return (
            f"caso {self.case.case_id}, h_pd={d.h_pd:.6g} m, h_PUM={d.h_pum:.6g} m, "
            f"delta={self.delta:.6g} m, T={self.ramp_time:.6g} s, "
            f"{self.schedule.n_load_steps} pasos (intercambio cada {self.schedule.exchange_every}, "
            f"{self.schedule.inner_scheme})"
        )
