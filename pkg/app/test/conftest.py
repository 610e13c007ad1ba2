# app/test/conftest.py
"""
Configuración de fixtures para pytest
Define fixtures compartidos entre todos los tests
"""

import numpy as np
import pytest

from app.schemas.geometry import CrackPath, DomainSpec, Hole
from app.schemas.material import HorizonGeometry


# ═══════════════════════════════════════════════════════════
# FIXTURES DE MATERIAL
# ═══════════════════════════════════════════════════════════

@pytest.fixture
def unit_material():
    """
    Material adimensional: E = 1, Gc = 4/pi (C = 1, beta = 6), rho = 1
    """
    from app.services.material import build_material

    return build_material(E=1.0, Gc=4.0 / np.pi, rho=1.0)


@pytest.fixture
def benchmark_material():
    """Material por defecto de la viga (tipo PMMA)"""
    from app.services.material import benchmark_material

    return benchmark_material()


@pytest.fixture
def unit_horizon():
    return HorizonGeometry(delta=1.0)


# ═══════════════════════════════════════════════════════════
# FIXTURES DE GEOMETRÍA
# ═══════════════════════════════════════════════════════════

@pytest.fixture
def square_domain():
    """
    Cuadrado unitario [-0.5, 0.5]² con una entalla corta en el borde
    inferior, pegada al borde izquierdo
    """
    return DomainSpec(
        length=1.0,
        height=1.0,
        support_inset=0.1,
        thickness=1.0,
        initial_crack=CrackPath(points=((-0.5, -0.5), (-0.5, -0.45))),
    )


@pytest.fixture
def small_beam():
    """Viga pequeña de 0.2 x 0.08 m con entalla de 1 cm a 2 cm del centro"""
    return DomainSpec(
        length=0.2,
        height=0.08,
        support_inset=0.01,
        thickness=0.01,
        initial_crack=CrackPath(points=((-0.02, -0.04), (-0.02, -0.03))),
    )


@pytest.fixture
def holed_beam():
    """La viga pequeña con un agujero de radio 5 mm"""
    return DomainSpec(
        length=0.2,
        height=0.08,
        support_inset=0.01,
        thickness=0.01,
        holes=[Hole(center=(0.04, 0.0), radius=0.005)],
        initial_crack=CrackPath(points=((-0.02, -0.04), (-0.02, -0.03))),
    )


# ═══════════════════════════════════════════════════════════
# FIXTURES DE CONFIGURACIÓN
# ═══════════════════════════════════════════════════════════

COARSE_INI = """
[case]
case_id = I

[discretization]
h_pd = 0.002
h_pum = 0.0127
t_n = 400
t_s = 2e-7
target_stretch_ratio = 3.0

[schedule]
n_load_steps = 4
exchange_every = 2

[box]
initial_size = 0.08
max_size = 0.12
"""


@pytest.fixture
def coarse_ini():
    """Texto INI de una corrida gruesa del caso I"""
    return COARSE_INI


@pytest.fixture
def coarse_config(coarse_ini):
    from app.crud.config_file import parse_config

    return parse_config(coarse_ini)


@pytest.fixture
def rng():
    """Generador aleatorio con semilla fija"""
    return np.random.default_rng(20240601)


# ═══════════════════════════════════════════════════════════
# CONFIGURACIÓN DE PYTEST
# ═══════════════════════════════════════════════════════════

def pytest_configure(config):
    """
    Configuración global de pytest
    """
    config.addinivalue_line(
        "markers", "slow: marca corridas largas de la viga de referencia"
    )
    config.addinivalue_line(
        "markers", "integration: marca tests de integración"
    )


def pytest_collection_modifyitems(config, items):
    """Los tests lentos solo corren con -m slow"""
    if "slow" in (config.getoption("-m") or ""):
        return
    skip = pytest.mark.skip(reason="corrida larga: usar -m slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session", autouse=True)
def setup_test_environment():
    """
    Configuración del entorno de test antes de ejecutar todos los tests
    """
    import os

    os.environ["ENVIRONMENT"] = "test"

    yield
