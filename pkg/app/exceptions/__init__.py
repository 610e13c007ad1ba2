"""
Excepciones personalizadas y manejador de errores
"""

from app.exceptions.handlers import (
    # Códigos de salida
    EXIT_OK,
    EXIT_CONFIG_ERROR,
    EXIT_SOLVER_ERROR,

    # Excepciones personalizadas
    AppException,
    InvalidParameterError,
    ConfigError,
    InvalidScheduleError,
    DegenerateBondError,
    UndefinedDamageError,
    EmptyDomainError,
    DivergenceError,
    OutOfDomainError,
    AssemblyError,
    AmbiguousBandError,
    CrackGapError,
    CrackGeometryError,
    UnknownCaseError,
    ReferenceDataError,
    CoupledRunError,

    # Manejador
    handle_exception
)

__all__ = [
    "EXIT_OK",
    "EXIT_CONFIG_ERROR",
    "EXIT_SOLVER_ERROR",
    "AppException",
    "InvalidParameterError",
    "ConfigError",
    "InvalidScheduleError",
    "DegenerateBondError",
    "UndefinedDamageError",
    "EmptyDomainError",
    "DivergenceError",
    "OutOfDomainError",
    "AssemblyError",
    "AmbiguousBandError",
    "CrackGapError",
    "CrackGeometryError",
    "UnknownCaseError",
    "ReferenceDataError",
    "CoupledRunError",
    "handle_exception"
]
