"""
Excepciones personalizadas y su manejador para la línea de comandos
"""

from typing import Dict, Any, List, Optional
import logging

from pydantic import ValidationError as PydanticValidationError

from app.exceptions.messages import get_error_message

logger = logging.getLogger(__name__)


# ═══════════════════════════════════════════════════════════
# CÓDIGOS DE SALIDA
# ═══════════════════════════════════════════════════════════

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_SOLVER_ERROR = 2


# ═══════════════════════════════════════════════════════════
# EXCEPCIONES PERSONALIZADAS
# ═══════════════════════════════════════════════════════════

class AppException(Exception):
    """Excepción base de la aplicación"""

    def __init__(
        self,
        message: str,
        exit_code: int = EXIT_SOLVER_ERROR,
        details: Optional[Dict[str, Any]] = None
    ):
        self.message = message
        self.exit_code = exit_code
        self.details = details or {}
        super().__init__(self.message)


class InvalidParameterError(AppException, ValueError):
    """Parámetro de material o de modelo fuera de rango"""

    def __init__(self, field: str, value: Any, key: str = "NON_POSITIVE"):
        super().__init__(
            message=get_error_message("MATERIAL", key, field=field, value=value),
            exit_code=EXIT_CONFIG_ERROR,
            details={"field": field, "value": value}
        )


class ConfigError(AppException):
    """Errores de validación del archivo de configuración"""

    def __init__(self, errors: List[Dict[str, str]], message: Optional[str] = None):
        super().__init__(
            message=message or get_error_message("CONFIG", "INVALID_CONFIG", count=len(errors)),
            exit_code=EXIT_CONFIG_ERROR,
            details={"errors": errors}
        )
        self.errors = errors

    @property
    def key_paths(self) -> List[str]:
        return [error["field"] for error in self.errors]


class InvalidScheduleError(AppException):
    """Rampa o calendario de carga inválido"""

    def __init__(self, value: float):
        super().__init__(
            message=get_error_message("PD", "INVALID_SCHEDULE", value=value),
            exit_code=EXIT_CONFIG_ERROR,
            details={"T": value}
        )


class DegenerateBondError(AppException):
    """Enlace con vector de referencia nulo"""

    def __init__(self):
        super().__init__(message=get_error_message("PD", "DEGENERATE_BOND"))


class UndefinedDamageError(AppException):
    """Nodo aislado: el daño no está definido"""

    def __init__(self, node: Optional[int] = None):
        super().__init__(
            message=get_error_message("PD", "UNDEFINED_DAMAGE"),
            details={"node": node}
        )


class EmptyDomainError(AppException):
    """La caja PD no contiene material"""

    def __init__(self, box: Any = None):
        super().__init__(
            message=get_error_message("PD", "EMPTY_DOMAIN"),
            details={"box": str(box)}
        )


class DivergenceError(AppException):
    """Estado no finito durante la integración explícita"""

    def __init__(self, node: int, step: Optional[int] = None):
        super().__init__(
            message=get_error_message("PD", "DIVERGENCE", node=node, step=step),
            details={"node": node, "step": step}
        )
        self.node = node
        self.step = step


class OutOfDomainError(AppException):
    """Evaluación fuera de la viga o sobre la grieta sin indicación de lado"""

    def __init__(self, x: float, y: float, key: str = "OUT_OF_DOMAIN"):
        super().__init__(
            message=get_error_message("GLOBAL", key, x=x, y=y),
            details={"point": (x, y), "reason": key}
        )


class AssemblyError(AppException):
    """Sistema global singular"""

    def __init__(self, nullity: int):
        super().__init__(
            message=get_error_message("GLOBAL", "SINGULAR", nullity=nullity),
            details={"nullity": nullity}
        )
        self.nullity = nullity


class AmbiguousBandError(AppException):
    """Banda de daño no localizada"""

    def __init__(self, width: float, limit: float):
        super().__init__(
            message=get_error_message("CRACK", "AMBIGUOUS_BAND", width=width, limit=limit),
            details={"width": width, "limit": limit}
        )


class CrackGapError(AppException):
    """Extensión de grieta que no continúa la punta actual"""

    def __init__(self, gap: float):
        super().__init__(
            message=get_error_message("CRACK", "GAP", gap=gap),
            details={"gap": gap}
        )
        self.gap = gap


class CrackGeometryError(AppException, ValueError):
    """Trayectoria de grieta geométricamente inválida"""

    def __init__(self, key: str):
        super().__init__(
            message=get_error_message("CRACK", key),
            details={"reason": key}
        )


class UnknownCaseError(AppException, ValueError):
    """Identificador de caso desconocido"""

    def __init__(self, case_id: Any):
        super().__init__(
            message=get_error_message("CONFIG", "UNKNOWN_CASE", case_id=case_id),
            exit_code=EXIT_CONFIG_ERROR,
            details={"case_id": str(case_id)}
        )


class ReferenceDataError(AppException):
    """Falta el archivo de referencia empaquetado"""

    def __init__(self, case_id: Any, path: str):
        super().__init__(
            message=get_error_message("CONFIG", "MISSING_REFERENCE", case_id=case_id),
            details={"case_id": str(case_id), "path": path}
        )


class CoupledRunError(AppException):
    """Error en un subpaso del ciclo global-local, con contexto del paso"""

    def __init__(self, step: int, stage: str, original: Exception):
        exit_code = getattr(original, "exit_code", EXIT_SOLVER_ERROR)
        super().__init__(
            message=f"Paso de carga {step} ({stage}): {original}",
            exit_code=exit_code,
            details={
                **getattr(original, "details", {}),
                "step": step,
                "stage": stage,
                "original_error": type(original).__name__,
            }
        )
        self.step = step
        self.stage = stage
        self.original = original


# ═══════════════════════════════════════════════════════════
# MANEJADOR DE EXCEPCIONES
# ═══════════════════════════════════════════════════════════

def handle_exception(exc: BaseException) -> int:
    """
    Registra cualquier excepción y la traduce a un código de salida

    Args:
        exc: Excepción capturada en la línea de comandos

    Returns:
        0 éxito, 1 error de configuración, 2 error del solver
    """
    if isinstance(exc, AppException):
        logger.error(
            f"AppException: {exc.message} - "
            f"Código: {exc.exit_code} - "
            f"Detalles: {exc.details}"
        )
        return exc.exit_code

    if isinstance(exc, PydanticValidationError):
        logger.warning(f"Validation Error: {exc.error_count()} errores")
        return EXIT_CONFIG_ERROR

    if isinstance(exc, OSError):
        logger.error(f"{get_error_message('GENERAL', 'IO_ERROR', path=exc.filename)} {exc.strerror or exc}")
        return EXIT_SOLVER_ERROR

    logger.error(
        f"Unhandled Exception: {type(exc).__name__} - {str(exc)}",
        exc_info=exc
    )
    return EXIT_SOLVER_ERROR
