"""Mapping tracker gaze onto the 512-px image grid of the annotation window."""

from __future__ import annotations

import math
from typing import Optional, Tuple

from gazebench.session.model import DisplaySample, EyeSample, GazeSample
from gazebench.volume.core import IN_PLANE_DIM


def _eye_point(eye: EyeSample) -> Optional[Tuple[float, float]]:
    x, y = eye.gaze_point_on_display_area
    if eye.gaze_point_validity != 1 or math.isnan(x) or math.isnan(y):
        return None
    return (x, y)


def fused_display_point(gaze: GazeSample) -> Optional[Tuple[float, float]]:
    """Mean of the valid eyes' normalized display coordinates."""
    points = [p for p in (_eye_point(gaze.left), _eye_point(gaze.right)) if p]
    if not points:
        return None
    return (
        sum(p[0] for p in points) / len(points),
        sum(p[1] for p in points) / len(points),
    )


def monitor_point(gaze: GazeSample, display: DisplaySample) -> Optional[Tuple[float, float]]:
    point = fused_display_point(gaze)
    if point is None:
        return None
    return (point[0] * display.monitor_width, point[1] * display.monitor_height)


def map_gaze_to_image(
    gaze: GazeSample, display: DisplaySample
) -> Optional[Tuple[float, float]]:
    """Gaze in 512-px image coordinates, or None when invalid / off-window.

    normalized gaze -> monitor pixels -> window-relative fraction -> x 512.
    """
    point = monitor_point(gaze, display)
    if point is None:
        return None
    u = (point[0] - display.window_x) / display.window_width
    v = (point[1] - display.window_y) / display.window_height
    if not (0.0 <= u < 1.0 and 0.0 <= v < 1.0):
        return None
    return (u * IN_PLANE_DIM, v * IN_PLANE_DIM)


def image_to_monitor(
    image_xy: Tuple[float, float], display: DisplaySample
) -> Tuple[float, float]:
    """Inverse of map_gaze_to_image for a point in 512-px image space."""
    return (
        display.window_x + image_xy[0] / IN_PLANE_DIM * display.window_width,
        display.window_y + image_xy[1] / IN_PLANE_DIM * display.window_height,
    )
