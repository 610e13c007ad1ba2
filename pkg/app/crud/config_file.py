"""
Lectura y escritura del archivo de configuración de corrida (INI)

Secciones planas clave = valor. Las claves desconocidas se rechazan y los
errores se reportan con la ruta "seccion.clave".
"""

import configparser
import logging
from pathlib import Path
from typing import Any, Dict, List, Union

from pydantic import ValidationError

from app.exceptions import ConfigError
from app.exceptions.messages import get_error_message
from app.schemas.config import RunConfig

logger = logging.getLogger(__name__)

SECTIONS = tuple(RunConfig.model_fields)


def _parser() -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None)
    # Claves sensibles a mayúsculas (E, Gc)
    parser.optionxform = str
    return parser


def _errores(exc: ValidationError) -> List[Dict[str, str]]:
    errores = []
    for err in exc.errors():
        loc = [str(p) for p in err["loc"]]
        errores.append({"field": ".".join(loc) or "config", "message": err["msg"]})
    return errores


def parse_config(text: str) -> RunConfig:
    """
    Interpreta el texto de un archivo INI y lo valida

    Args:
        text: Contenido del archivo

    Returns:
        Configuración validada con valores por defecto aplicados

    Raises:
        ConfigError: Sintaxis inválida, sección desconocida o valores fuera
            de rango (con las rutas seccion.clave)
    """
    parser = _parser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        reason = str(exc).splitlines()[0]
        raise ConfigError(
            [{"field": "config", "message": reason}],
            message=get_error_message("CONFIG", "UNREADABLE", reason=reason)
        ) from exc

    datos: Dict[str, Dict[str, Any]] = {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(
                [{"field": section, "message": "sección desconocida"}],
                message=get_error_message("CONFIG", "UNKNOWN_SECTION", section=section)
            )
        datos[section] = {k: v.strip() for k, v in parser.items(section) if v.strip() != ""}

    try:
        config = RunConfig.model_validate(datos)
    except ValidationError as exc:
        errores = _errores(exc)
        for err in errores:
            logger.warning(f"⚠️ {err['field']}: {err['message']}")
        raise ConfigError(errores) from exc

    logger.debug(f"Configuración: {config.describe()}")
    return config


def load_config(file: Union[str, Path]) -> RunConfig:
    """Lee y valida un archivo de configuración"""
    return parse_config(Path(file).read_text(encoding="utf-8"))


def serialize_config(config: RunConfig) -> str:
    """
    Texto INI con los valores explícitos de la configuración

    Los campos opcionales sin valor se omiten, de modo que
    parse -> serialize -> parse es un punto fijo.
    """
    parser = _parser()
    for section, modelo in config:
        parser.add_section(section)
        for key, value in modelo.model_dump(exclude_none=True).items():
            parser.set(section, key, repr(value) if isinstance(value, float) else str(value))

    lineas: List[str] = []
    for section in parser.sections():
        lineas.append(f"[{section}]")
        lineas.extend(f"{k} = {v}" for k, v in parser.items(section))
        lineas.append("")
    return "\n".join(lineas)
