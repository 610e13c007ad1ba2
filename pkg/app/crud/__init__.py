"""
Persistencia de la aplicación: configuración INI y resultados CSV
"""

from app.crud.config_file import load_config, parse_config, serialize_config
from app.crud.crack_csv import (
    read_crack_csv,
    write_crack_csv,
    write_diagnostics_csv,
    write_field_snapshot,
    write_pd_snapshot,
)

__all__ = [
    "load_config",
    "parse_config",
    "serialize_config",
    "read_crack_csv",
    "write_crack_csv",
    "write_diagnostics_csv",
    "write_field_snapshot",
    "write_pd_snapshot",
]
