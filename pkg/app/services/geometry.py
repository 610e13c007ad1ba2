"""
Geometría de la viga en flexión de tres puntos y casos de referencia

Dimensiones en pulgadas convertidas a metros; coordenadas de viga con x
desde el centro del claro e y desde la media altura.
"""

import logging
from pathlib import Path
from typing import Dict, Optional

from app.core.config import settings
from app.crud.crack_csv import read_crack_csv
from app.exceptions import ReferenceDataError, UnknownCaseError
from app.schemas.geometry import CaseSpec, CrackPath, DomainSpec, Hole
from app.utils.units import inches

logger = logging.getLogger(__name__)


# ═══════════════════════════════════════════════════════════
# DIMENSIONES DE LA VIGA [in]
# ═══════════════════════════════════════════════════════════

BEAM_LENGTH_IN = 20.0
BEAM_HEIGHT_IN = 8.0
SUPPORT_INSET_IN = 1.0
HOLE_DIAMETER_IN = 0.5
HOLE_X_IN = -4.0
# Alturas de los centros sobre el borde inferior
HOLE_HEIGHTS_IN = (6.75, 4.75, 2.75)

CASES: Dict[str, CaseSpec] = {
    "I": CaseSpec(case_id="I", a=1.0, b=6.0, n_holes=0),
    "II": CaseSpec(case_id="II", a=1.0, b=6.0, n_holes=3),
    "III": CaseSpec(case_id="III", a=1.5, b=5.0, n_holes=3),
}


def build_domain(case: CaseSpec, thickness: float = 0.0254) -> DomainSpec:
    """
    Construye la viga de un caso

    La entalla es vertical, a b pulgadas a la izquierda del centro del claro,
    y sube a pulgadas desde el borde inferior.

    Args:
        case: Parámetros del caso
        thickness: Espesor fuera del plano [m]

    Returns:
        Geometría validada
    """
    length, height = inches(BEAM_LENGTH_IN), inches(BEAM_HEIGHT_IN)
    x_crack = -inches(case.b)
    bottom = -height / 2

    holes = [
        Hole(center=(inches(HOLE_X_IN), inches(h - BEAM_HEIGHT_IN / 2)), radius=inches(HOLE_DIAMETER_IN / 2))
        for h in HOLE_HEIGHTS_IN[:case.n_holes]
    ]
    crack = CrackPath(points=((x_crack, bottom), (x_crack, bottom + inches(case.a))))

    return DomainSpec(
        length=length,
        height=height,
        support_inset=inches(SUPPORT_INSET_IN),
        thickness=thickness,
        holes=holes,
        initial_crack=crack,
    )


def build_case(case_id: str, thickness: float = 0.0254) -> DomainSpec:
    """
    Viga de uno de los casos de referencia I, II o III

    Raises:
        UnknownCaseError: Si el identificador no existe
    """
    case = CASES.get(str(case_id).strip().upper())
    if case is None:
        raise UnknownCaseError(case_id)
    logger.debug(f"Caso {case.case_id}: a={case.a} in, b={case.b} in, {case.n_holes} agujeros")
    return build_domain(case, thickness)


def reference_file(case_id: str, data_dir: Optional[Path] = None) -> Path:
    return Path(data_dir or settings.DATA_DIR) / f"case_{case_id}.csv"


def load_reference_path(case_id: str, data_dir: Optional[Path] = None) -> CrackPath:
    """
    Trayectoria de referencia empaquetada para un caso

    Raises:
        UnknownCaseError: Si el identificador no existe
        ReferenceDataError: Si falta el CSV
    """
    key = str(case_id).strip().upper()
    if key not in CASES:
        raise UnknownCaseError(case_id)
    path = reference_file(key, data_dir)
    if not path.is_file():
        raise ReferenceDataError(key, str(path))
    return read_crack_csv(path)
