"""
Simulador de fractura 2D: elasticidad PUM global acoplada con peridinámica local
"""
