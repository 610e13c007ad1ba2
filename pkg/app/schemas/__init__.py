"""
Schemas Pydantic para validación y serialización
"""

from app.schemas.material import (
    BOND_BASED_POISSON,
    MaterialParams,
    HorizonGeometry,
    Bond
)
from app.schemas.geometry import (
    Point,
    Rect,
    Hole,
    CrackPath,
    DomainSpec,
    CaseSpec,
    PDBox
)
from app.schemas.coupling import (
    CouplingSchedule,
    BoxPolicy,
    StepDiagnostics,
    RunReport
)
from app.schemas.config import (
    RunConfig,
    CaseSection,
    MaterialSection,
    DiscretizationSection,
    ScheduleSection,
    BoxSection,
    ExtractionSection,
    OutputSection,
    SolverSection
)

__all__ = [
    # Material
    "BOND_BASED_POISSON",
    "MaterialParams",
    "HorizonGeometry",
    "Bond",

    # Geometría
    "Point",
    "Rect",
    "Hole",
    "CrackPath",
    "DomainSpec",
    "CaseSpec",
    "PDBox",

    # Acoplamiento
    "CouplingSchedule",
    "BoxPolicy",
    "StepDiagnostics",
    "RunReport",

    # Configuración
    "RunConfig",
    "CaseSection",
    "MaterialSection",
    "DiscretizationSection",
    "ScheduleSection",
    "BoxSection",
    "ExtractionSection",
    "OutputSection",
    "SolverSection"
]
