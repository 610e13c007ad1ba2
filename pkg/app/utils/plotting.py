"""
Gráficos de comparación de trayectorias (SVG determinista)
"""

import logging
from pathlib import Path
from typing import Sequence, Tuple, Union

import matplotlib

matplotlib.use("Agg")

from matplotlib import rc_context  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402
from matplotlib.patches import Circle, Rectangle  # noqa: E402

from app.exceptions import InvalidParameterError  # noqa: E402
from app.schemas.geometry import CrackPath, DomainSpec, Rect  # noqa: E402

logger = logging.getLogger(__name__)

COLORS = ("tab:red", "black", "tab:blue", "tab:green", "tab:orange", "tab:purple")


def plot_comparison(
    paths: Sequence[Tuple[str, CrackPath]],
    domain: DomainSpec,
    file: Union[str, Path],
    boxes: Sequence[Rect] = (),
) -> Path:
    """
    Dibuja la viga, los agujeros, la entalla inicial y las trayectorias

    Cada trayectoria es un Line2D con gid crack-path-<k>; las cajas PD son
    rectángulos pd-box-<k> de opacidad creciente. El SVG no lleva fecha y usa
    una sal de hash fija, de modo que es idéntico para entradas idénticas.

    Args:
        paths: Pares (etiqueta, trayectoria), al menos uno
        domain: Geometría de la viga
        file: Archivo SVG de destino
        boxes: Cajas PD en orden cronológico

    Returns:
        Ruta escrita
    """
    if not paths:
        raise InvalidParameterError("paths", 0, key="OUT_OF_RANGE")

    destino = Path(file)
    destino.parent.mkdir(parents=True, exist_ok=True)

    with rc_context({"svg.hashsalt": "pum-pd", "svg.fonttype": "none"}):
        fig = Figure(figsize=(10, 4.5))
        ax = fig.add_subplot(1, 1, 1)

        b = domain.bounds
        ax.add_patch(Rectangle(
            (b.xmin, b.ymin), b.width, b.height,
            fill=False, edgecolor="0.3", linewidth=1.0, gid="beam"
        ))
        for k, hole in enumerate(domain.holes):
            ax.add_patch(Circle(hole.center, hole.radius, fill=False, edgecolor="0.3", gid=f"hole-{k}"))

        inicial = domain.initial_crack.as_array()
        ax.plot(inicial[:, 0], inicial[:, 1], linestyle="--", color="0.4", gid="initial-crack")

        n = len(boxes)
        for k, rect in enumerate(boxes):
            ax.add_patch(Rectangle(
                (rect.xmin, rect.ymin), rect.width, rect.height,
                facecolor="tab:blue", edgecolor="none",
                alpha=0.05 + 0.25 * (k + 1) / n, gid=f"pd-box-{k}"
            ))

        for k, (label, path) in enumerate(paths):
            pts = path.as_array()
            ax.plot(pts[:, 0], pts[:, 1], color=COLORS[k % len(COLORS)],
                    linewidth=1.5, label=label, gid=f"crack-path-{k}")

        ax.set_aspect("equal")
        ax.set_xlim(b.xmin, b.xmax)
        ax.set_ylim(b.ymin, b.ymax)
        ax.set_xlabel("x desde el centro del claro [m]")
        ax.set_ylabel("y desde la media altura [m]")
        ax.legend(loc="upper right", fontsize="small")
        fig.savefig(destino, format="svg", metadata={"Date": None})

    logger.info(f"📊 Gráfico guardado en {destino}")
    return destino
