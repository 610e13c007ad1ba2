"""
Acoplamiento global-local PUM/PD
"""

from app.services.coupling.base import GlobalSolver, LocalSolver
from app.services.coupling.box_policy import adapt_box, make_initial_box
from app.services.coupling.orchestrator import (
    CoupledRunService,
    PDLocalSolver,
    PUMGlobalSolver,
    build_service,
    build_solvers,
    calibrate_load_scale,
    domain_from_config,
    global_field_on_nodes,
    run_coupled,
    transfer_global_to_pd,
)

__all__ = [
    "GlobalSolver",
    "LocalSolver",
    "adapt_box",
    "make_initial_box",
    "CoupledRunService",
    "PDLocalSolver",
    "PUMGlobalSolver",
    "build_service",
    "build_solvers",
    "calibrate_load_scale",
    "domain_from_config",
    "global_field_on_nodes",
    "run_coupled",
    "transfer_global_to_pd",
]
