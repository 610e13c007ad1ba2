"""
Contratos de los solvers que participan en el ciclo global-local
"""

from abc import ABC, abstractmethod
from typing import Any, Optional

import numpy as np

from app.schemas.geometry import CrackPath, PDBox


class GlobalSolver(ABC):
    """Solver global: problema elástico de toda la viga con la grieta actual"""

    # Factor que multiplica cada factor de carga pedido
    load_scale: float = 1.0

    @abstractmethod
    def solve(self, crack: CrackPath, load_factor: float) -> Any:
        """Solución global para la grieta y el factor de carga dados"""

    @abstractmethod
    def layer_targets(self, solution: Any, state: Any) -> np.ndarray:
        """Desplazamientos objetivo (n_capa, 2) para la capa de borde del estado PD"""

    def node_field(self, solution: Any, state: Any) -> Optional[np.ndarray]:
        """Campo global (n_nodos, 2) en todos los nodos PD; None si no se ofrece"""
        return None


class LocalSolver(ABC):
    """Solver local: peridinámica en una caja alrededor de la punta"""

    @abstractmethod
    def build(self, box: PDBox, crack: CrackPath) -> Any:
        """Estado inicial de la caja con los enlaces filtrados por la grieta"""

    @abstractmethod
    def run(self, state: Any, targets: np.ndarray) -> Any:
        """Resolución con rampa hacia targets; devuelve el estado final"""

    @abstractmethod
    def extract(self, state: Any, crack: CrackPath) -> CrackPath:
        """Trayectoria actualizada a partir del daño del estado"""
