"""
Conversión de unidades de la geometría de referencia (pulgadas <-> metros)
"""

IN_TO_M = 0.0254


def inches(value):
    """Pulgadas a metros; acepta escalares y arreglos de numpy"""
    return value * IN_TO_M


def to_inches(value):
    """Metros a pulgadas"""
    return value / IN_TO_M
