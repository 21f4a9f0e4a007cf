"""Screen/eye geometry and angular distance between gaze vectors.

User coordinate system: millimetres with the screen center at the origin,
the screen in the z=0 plane, +x to the viewer's right, +y up and +z toward
the viewer. Screen pixels have (0, 0) at the top-left corner.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from gazebench.errors import DegenerateGeometryError

# 27-inch 16:9 panel; overridable per session
DEFAULT_SCREEN_MM = (596.7, 335.7)
DEFAULT_MONITOR_PX = (2560, 1440)


@dataclass(frozen=True)
class ViewingGeometry:
    screen_width_mm: float = DEFAULT_SCREEN_MM[0]
    screen_height_mm: float = DEFAULT_SCREEN_MM[1]
    monitor_width_px: int = DEFAULT_MONITOR_PX[0]
    monitor_height_px: int = DEFAULT_MONITOR_PX[1]

    def __post_init__(self):
        if min(
            self.screen_width_mm,
            self.screen_height_mm,
            self.monitor_width_px,
            self.monitor_height_px,
        ) <= 0:
            raise ValueError("geometry dimensions must be positive")

    @property
    def mm_per_px(self) -> Tuple[float, float]:
        return (
            self.screen_width_mm / self.monitor_width_px,
            self.screen_height_mm / self.monitor_height_px,
        )

    def pixel_to_mm(self, px: float, py: float) -> Tuple[float, float, float]:
        """Screen pixel to user-coordinate mm on the screen plane (z = 0)."""
        kx, ky = self.mm_per_px
        return (
            (px - self.monitor_width_px / 2.0) * kx,
            (self.monitor_height_px / 2.0 - py) * ky,
            0.0,
        )


def angle_between(
    gaze_origin_mm: Tuple[float, float, float],
    p1_screen_px: Tuple[float, float],
    p2_screen_px: Tuple[float, float],
    geom: ViewingGeometry,
) -> float:
    """Angle in degrees between the gaze vectors to two screen points."""
    origin = np.asarray(gaze_origin_mm, dtype=np.float64)
    v1 = np.asarray(geom.pixel_to_mm(*p1_screen_px)) - origin
    v2 = np.asarray(geom.pixel_to_mm(*p2_screen_px)) - origin
    if not v1.any() or not v2.any():
        raise DegenerateGeometryError(
            "gaze origin coincides with a screen point; angle undefined"
        )
    # atan2 of |cross| and dot: exact at 0 and stable near 0/180 degrees
    cross = np.linalg.norm(np.cross(v1, v2))
    return math.degrees(math.atan2(cross, float(np.dot(v1, v2))))


def min_angle_to_pixels(
    gaze_origin_mm: Tuple[float, float, float],
    point_px: Tuple[float, float],
    pixels_px: np.ndarray,
    geom: ViewingGeometry,
) -> float:
    """Smallest angle from a screen point to any pixel of a set (vectorized)."""
    if len(pixels_px) == 0:
        raise ValueError("pixel set must be nonempty")
    origin = np.asarray(gaze_origin_mm, dtype=np.float64)
    v1 = np.asarray(geom.pixel_to_mm(*point_px)) - origin
    if not v1.any():
        raise DegenerateGeometryError("gaze origin coincides with the query point")
    kx, ky = geom.mm_per_px
    pixels = np.asarray(pixels_px, dtype=np.float64)
    mm = np.empty((len(pixels), 3))
    mm[:, 0] = (pixels[:, 0] - geom.monitor_width_px / 2.0) * kx
    mm[:, 1] = (geom.monitor_height_px / 2.0 - pixels[:, 1]) * ky
    mm[:, 2] = 0.0
    vecs = mm - origin[None, :]
    if not vecs.any(axis=1).all():
        raise DegenerateGeometryError("gaze origin coincides with a mask pixel")
    cross = np.linalg.norm(np.cross(vecs, v1), axis=1)
    dots = vecs @ v1
    angles = np.arctan2(cross, dots)
    return math.degrees(float(angles.min()))
