"""
Configuración centralizada de logging

Un archivo rotativo y la consola para el proceso, más un log por corrida
en el directorio de resultados con el diagnóstico de cada paso de carga.
"""

import logging
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional, Union

from app.core.config import settings

# Marca de los handlers instalados aquí, para poder reemplazarlos
_HANDLER_TAG = "_pum_pd"

RUN_LOGGER = "corridas"

# Librerías que escriben demasiado en DEBUG
_QUIET = ("matplotlib", "matplotlib.font_manager", "PIL", "shapely")


def _own_handlers(logger: logging.Logger):
    return [h for h in logger.handlers if getattr(h, _HANDLER_TAG, False)]


def _tag(handler: logging.Handler) -> logging.Handler:
    setattr(handler, _HANDLER_TAG, True)
    return handler


def setup_logging(level: Optional[str] = None) -> logging.Logger:
    """
    Configura el logger raíz: archivo rotativo (10 MB x 5) y stdout

    Se puede llamar varias veces en el mismo proceso (cada invocación de
    main): los handlers previos de este módulo se reemplazan.

    Args:
        level: Nivel explícito; por defecto Settings.LOG_LEVEL
    """
    nombre = (level or settings.LOG_LEVEL).upper()
    log_level = getattr(logging, nombre, logging.INFO)

    root_logger = logging.getLogger()
    for handler in _own_handlers(root_logger):
        root_logger.removeHandler(handler)
        handler.close()

    log_file = settings.LOGS_DIR / Path(settings.LOG_FILE).name
    file_handler = _tag(RotatingFileHandler(
        log_file, maxBytes=10 * 1024 * 1024, backupCount=5, encoding="utf-8"
    ))
    file_handler.setFormatter(logging.Formatter(settings.LOG_FORMAT))

    # En consola, sin fecha
    console_handler = _tag(logging.StreamHandler(sys.stdout))
    console_handler.setFormatter(logging.Formatter("%(levelname)s - %(name)s - %(message)s"))

    for handler in (file_handler, console_handler):
        handler.setLevel(log_level)
        root_logger.addHandler(handler)
    root_logger.setLevel(log_level)

    for name in _QUIET:
        logging.getLogger(name).setLevel(logging.WARNING)

    logger = logging.getLogger(__name__)
    logger.debug(f"✅ Logging configurado - Nivel: {nombre}, archivo: {log_file}")
    return logger


def setup_run_logging(output_dir: Optional[Union[str, Path]] = None) -> logging.Logger:
    """
    Logger "corridas" para el diagnóstico por paso de carga

    Escribe en <output_dir>/corrida.log si se indica el directorio de la
    corrida, y en Settings.RUN_LOG_FILE (50 MB x 10) en caso contrario.
    Un segundo llamado cambia el destino.

    Returns:
        Logger de corridas
    """
    logger = logging.getLogger(RUN_LOGGER)
    logger.setLevel(logging.DEBUG)
    for handler in _own_handlers(logger):
        logger.removeHandler(handler)
        handler.close()

    if output_dir is not None:
        destino = Path(output_dir) / "corrida.log"
        handler = logging.FileHandler(destino, mode="w", encoding="utf-8")
    else:
        destino = settings.LOGS_DIR / Path(settings.RUN_LOG_FILE).name
        handler = RotatingFileHandler(
            destino, maxBytes=50 * 1024 * 1024, backupCount=10, encoding="utf-8"
        )
    handler.setFormatter(logging.Formatter(
        "%(asctime)s - %(levelname)s - %(message)s", datefmt="%Y-%m-%d %H:%M:%S"
    ))
    logger.addHandler(_tag(handler))
    return logger
