"""
Configuración central de la aplicación
"""

from app.core.config import settings

__all__ = ["settings"]