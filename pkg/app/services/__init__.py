"""
Servicios del simulador: material, peridinámica, solver global PUM,
extracción de grietas, geometría de la viga y acoplamiento
"""
