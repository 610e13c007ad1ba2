# app/exceptions/messages.py
"""
Mensajes de error centralizados
Facilita la internacionalización y mantenimiento
"""

from typing import Dict


# ═══════════════════════════════════════════════════════════
# MENSAJES DE ERROR GENERALES
# ═══════════════════════════════════════════════════════════

GENERAL_ERRORS: Dict[str, str] = {
    "INTERNAL_ERROR": "Error interno del simulador.",
    "IO_ERROR": "Error de entrada/salida en {path}.",
}


# ═══════════════════════════════════════════════════════════
# MENSAJES DE MATERIAL Y PARÁMETROS
# ═══════════════════════════════════════════════════════════

MATERIAL_ERRORS: Dict[str, str] = {
    "NON_POSITIVE": "{field} debe ser positivo (recibido {value}).",
    "POISSON_FIXED": "La peridinámica bond-based en deformación plana exige nu = 1/3 (recibido {value}).",
    "POISSON_RANGE": "nu debe estar en (0, 1/2) (recibido {value}).",
    "NEGATIVE_ARGUMENT": "{field} no puede ser negativo (recibido {value}).",
    "OUT_OF_RANGE": "{field} fuera de rango (recibido {value}).",
}


# ═══════════════════════════════════════════════════════════
# MENSAJES DEL MODELO Y SOLVER PERIDINÁMICO
# ═══════════════════════════════════════════════════════════

PD_ERRORS: Dict[str, str] = {
    "DEGENERATE_BOND": "Enlace degenerado: el vector de referencia tiene norma cero.",
    "UNDEFINED_DAMAGE": "Daño indefinido: el nodo no tiene enlaces.",
    "EMPTY_DOMAIN": "La caja PD no intersecta el material de la viga.",
    "DIVERGENCE": "Estado no finito en el nodo {node} (paso {step}).",
    "INVALID_SCHEDULE": "Tiempo de rampa inválido: T = {value} (debe ser > 0).",
}


# ═══════════════════════════════════════════════════════════
# MENSAJES DEL SOLVER GLOBAL
# ═══════════════════════════════════════════════════════════

GLOBAL_ERRORS: Dict[str, str] = {
    "OUT_OF_DOMAIN": "Punto ({x:.6g}, {y:.6g}) fuera del dominio de la viga.",
    "ON_CRACK": "Punto ({x:.6g}, {y:.6g}) sobre la grieta sin indicación de lado.",
    "NOT_COVERED": "Punto ({x:.6g}, {y:.6g}) fuera de todos los parches.",
    "SINGULAR": "Sistema global singular (dimensión estimada del núcleo: {nullity}).",
}


# ═══════════════════════════════════════════════════════════
# MENSAJES DE EXTRACCIÓN DE GRIETAS
# ═══════════════════════════════════════════════════════════

CRACK_ERRORS: Dict[str, str] = {
    "AMBIGUOUS_BAND": "Banda de daño demasiado ancha ({width:.4g} m > {limit:.4g} m): daño no localizado.",
    "GAP": "Extensión discontinua: separación de {gap:.4g} m respecto a la punta.",
    "TOO_FEW_POINTS": "Una trayectoria de grieta necesita al menos 2 puntos.",
    "DUPLICATE_POINTS": "Vértices consecutivos repetidos en la trayectoria.",
    "SELF_INTERSECTION": "La trayectoria de grieta se auto-intersecta.",
}


# ═══════════════════════════════════════════════════════════
# MENSAJES DE CONFIGURACIÓN Y CASOS
# ═══════════════════════════════════════════════════════════

CONFIG_ERRORS: Dict[str, str] = {
    "INVALID_CONFIG": "Configuración inválida ({count} errores).",
    "UNKNOWN_SECTION": "Sección desconocida: [{section}].",
    "UNKNOWN_CASE": "Caso desconocido: {case_id}. Opciones válidas: I, II, III.",
    "MISSING_REFERENCE": "No existe la trayectoria de referencia empaquetada para el caso {case_id}.",
    "UNREADABLE": "No se pudo interpretar el archivo de configuración: {reason}.",
}


# ═══════════════════════════════════════════════════════════
# FUNCIONES DE UTILIDAD
# ═══════════════════════════════════════════════════════════

def get_error_message(category: str, key: str, **kwargs) -> str:
    """
    Obtiene un mensaje de error formateado

    Args:
        category: Categoría del error (GENERAL, MATERIAL, PD, ...)
        key: Clave del mensaje
        **kwargs: Parámetros para formatear el mensaje

    Returns:
        Mensaje de error formateado
    """
    error_dict = {
        "GENERAL": GENERAL_ERRORS,
        "MATERIAL": MATERIAL_ERRORS,
        "PD": PD_ERRORS,
        "GLOBAL": GLOBAL_ERRORS,
        "CRACK": CRACK_ERRORS,
        "CONFIG": CONFIG_ERRORS,
    }

    messages = error_dict.get(category.upper(), GENERAL_ERRORS)
    message = messages.get(key, GENERAL_ERRORS["INTERNAL_ERROR"])

    try:
        return message.format(**kwargs)
    except (KeyError, ValueError):
        return message
