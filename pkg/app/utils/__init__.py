"""
Utilidades geométricas, unidades, métricas y gráficos
"""

from app.utils.units import inches, to_inches, IN_TO_M
from app.utils.metrics import discrete_frechet, frechet_distance
from app.utils.geometry import (
    segments_intersect,
    segments_cross_polyline,
    segments_hit_circle,
    point_segment_distance,
    polyline_distance,
    signed_side,
    polyline_length,
)

__all__ = [
    "inches",
    "to_inches",
    "IN_TO_M",
    "discrete_frechet",
    "frechet_distance",
    "segments_intersect",
    "segments_cross_polyline",
    "segments_hit_circle",
    "point_segment_distance",
    "polyline_distance",
    "signed_side",
    "polyline_length",
]
