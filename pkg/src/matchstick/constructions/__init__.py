"""Macro library: each construction emits primitive board instructions."""

from .advanced import (
    antipodal_on_circle,
    are_parallel,
    circle_circle_intersect,
    circle_line_intersect,
    line_through,
    parallel_through,
    perpendicular_through,
    rotate90_on_circle,
    translate_segment,
)
from .basic import GridHandle, coordinate_grid, extend_line, perpendicular_at, thales_trial
from .chain import CircleSpec, Construction, LineHandle, cross, line_from_stick
from .combined import (
    parallel_and_perpendicular_near,
    parallel_near,
    perpendicular_bisector,
    perpendicular_near,
)

__all__ = [
    "CircleSpec",
    "Construction",
    "GridHandle",
    "LineHandle",
    "antipodal_on_circle",
    "are_parallel",
    "circle_circle_intersect",
    "circle_line_intersect",
    "coordinate_grid",
    "cross",
    "extend_line",
    "line_from_stick",
    "line_through",
    "parallel_and_perpendicular_near",
    "parallel_near",
    "parallel_through",
    "perpendicular_at",
    "perpendicular_bisector",
    "perpendicular_near",
    "perpendicular_through",
    "rotate90_on_circle",
    "thales_trial",
    "translate_segment",
]
