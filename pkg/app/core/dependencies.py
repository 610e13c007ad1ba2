# app/core/dependencies.py
"""
Dependencias compartidas de los comandos: entorno y pool de hilos
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Union

from app.core.config import settings

logger = logging.getLogger(__name__)


# ═══════════════════════════════════════════════════════════
# DEPENDENCIAS DE VALIDACIÓN
# ═══════════════════════════════════════════════════════════

def validate_environment(output_dir: Optional[Union[str, Path]] = None) -> Path:
    """
    Valida que el entorno esté correctamente configurado

    Comprueba que el directorio de datos empaquetados exista y que el de
    resultados se pueda crear.

    Returns:
        Directorio de resultados listo para escribir

    Raises:
        RuntimeError: Si falta el directorio de datos o no se puede crear la salida
    """
    if not settings.DATA_DIR.is_dir():
        raise RuntimeError(f"No existe el directorio de datos: {settings.DATA_DIR}")

    destino = Path(output_dir or settings.OUTPUT_DIR)
    try:
        destino.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise RuntimeError(f"No se puede crear el directorio de resultados {destino}: {e}") from e
    return destino


# ═══════════════════════════════════════════════════════════
# DEPENDENCIAS DE EJECUCIÓN
# ═══════════════════════════════════════════════════════════

def resolve_workers(workers: Optional[int] = None) -> int:
    """Hilos efectivos: el valor de la corrida o Settings.WORKERS"""
    n = workers if workers is not None else settings.WORKERS
    return max(1, int(n))


def get_executor(workers: Optional[int] = None) -> Optional[ThreadPoolExecutor]:
    """
    Pool de hilos para el ensamblaje global y las fuerzas PD

    Uso:
        executor = get_executor(config.output.workers)
        try:
            ...
        finally:
            if executor is not None:
                executor.shutdown()

    Returns:
        None con un solo hilo (ejecución en serie)
    """
    n = resolve_workers(workers)
    if n == 1:
        return None
    logger.info(f"🧵 Pool de {n} hilos")
    return ThreadPoolExecutor(max_workers=n, thread_name_prefix="pum-pd")
