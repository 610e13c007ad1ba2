"""
Suite de tests del simulador de fractura PUM/PD
"""
