# app/core/config.py
"""
Configuración centralizada de la aplicación
Carga variables de entorno y define configuraciones globales del simulador
"""

from pydantic_settings import BaseSettings, SettingsConfigDict
import logging
import os
from pathlib import Path


class Settings(BaseSettings):
    """
    Configuración del proceso usando Pydantic Settings
    Lee automáticamente desde variables de entorno y archivo .env

    La configuración de cada corrida (material, discretización, esquema de
    acoplamiento) NO vive aquí: se lee del archivo INI de la corrida
    (ver app/crud/config_file.py).
    """

    # ═══════════════════════════════════════════════════════════
    # INFORMACIÓN DE LA APLICACIÓN
    # ═══════════════════════════════════════════════════════════

    PROJECT_NAME: str = "Simulador de Fractura PUM/PD"
    VERSION: str = "1.0.0"
    DESCRIPTION: str = (
        "Acoplamiento global-local de elasticidad lineal (PUM) con "
        "peridinámica bond-based en cajas móviles"
    )

    # ═══════════════════════════════════════════════════════════
    # ENTORNO
    # ═══════════════════════════════════════════════════════════

    ENVIRONMENT: str = "development"  # development, test, production
    DEBUG: bool = False

    # ═══════════════════════════════════════════════════════════
    # LOGGING
    # ═══════════════════════════════════════════════════════════

    LOG_LEVEL: str = "INFO"  # DEBUG, INFO, WARNING, ERROR, CRITICAL
    LOG_FILE: str = "logs/simulacion.log"
    LOG_FORMAT: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    # ═══════════════════════════════════════════════════════════
    # CORRIDAS
    # ═══════════════════════════════════════════════════════════

    RUN_LOG_FILE: str = "logs/corridas.log"
    OUTPUT_DIR: str = "resultados"
    WORKERS: int = 1

    # ═══════════════════════════════════════════════════════════
    # RUTAS
    # ═══════════════════════════════════════════════════════════

    @property
    def BASE_DIR(self) -> Path:
        """Directorio base del proyecto"""
        return Path(__file__).resolve().parent.parent.parent

    @property
    def DATA_DIR(self) -> Path:
        """Directorio de datos empaquetados (trayectorias de referencia)"""
        return Path(__file__).resolve().parent.parent / "data"

    @property
    def LOGS_DIR(self) -> Path:
        """Directorio de logs"""
        logs_dir = self.BASE_DIR / "logs"
        logs_dir.mkdir(exist_ok=True)
        return logs_dir

    # ═══════════════════════════════════════════════════════════
    # CONFIGURACIÓN DE PYDANTIC
    # ═══════════════════════════════════════════════════════════

    model_config = SettingsConfigDict(
        env_file=os.path.join(os.path.dirname(__file__), "..", ".env"),
        env_file_encoding="utf-8",
        case_sensitive=True,
    )


# Instancia global de configuración
settings = Settings()


# ═══════════════════════════════════════════════════════════
# FUNCIONES DE UTILIDAD
# ═══════════════════════════════════════════════════════════

def get_settings() -> Settings:
    """
    Función para obtener la configuración
    Útil para inyección en servicios y tests
    """
    return settings


def print_settings() -> None:
    """Registra la configuración efectiva del proceso"""
    logger = logging.getLogger(__name__)
    logger.info("=" * 60)
    logger.info(f"🚀 {settings.PROJECT_NAME} v{settings.VERSION}")
    logger.info("=" * 60)
    logger.info(f"Entorno: {settings.ENVIRONMENT}")
    logger.info(f"Debug: {settings.DEBUG}")
    logger.info(f"📝 Logs: nivel {settings.LOG_LEVEL}, archivo {settings.LOG_FILE}")
    logger.info(f"📁 Resultados: {settings.OUTPUT_DIR}")
    logger.info(f"🧵 Workers: {settings.WORKERS}")
    logger.info("=" * 60)
