"""Synthesis of full tracker samples for simulated gaze sources.

The pointer-as-gaze simulator and scripted tests build the same record
shape a live tracker produces (validities, origins, pupil fields), so every
downstream code path is identical to real-tracker sessions.
"""

from __future__ import annotations

from typing import Optional, Tuple

from gazebench.session.mapping import image_to_monitor
from gazebench.session.model import DisplaySample, EyeSample, GazeSample

DEFAULT_ORIGIN_MM = (0.0, 0.0, 650.0)
DEFAULT_PUPIL_MM = 3.5
TICK_US = 16667  # nominal 60Hz


def synth_eye(
    norm_xy: Optional[Tuple[float, float]],
    origin_mm: Tuple[float, float, float] = DEFAULT_ORIGIN_MM,
    screen_mm: Optional[Tuple[float, float]] = None,
    pupil_mm: float = DEFAULT_PUPIL_MM,
) -> EyeSample:
    if norm_xy is None:
        return EyeSample.invalid()
    point_ucs = (
        (float(screen_mm[0]), float(screen_mm[1]), 0.0)
        if screen_mm is not None
        else (float("nan"), float("nan"), float("nan"))
    )
    return EyeSample(
        gaze_point_on_display_area=(float(norm_xy[0]), float(norm_xy[1])),
        gaze_point_in_user_coordinate_system=point_ucs,
        gaze_point_validity=1,
        pupil_diameter=pupil_mm,
        pupil_validity=1,
        gaze_origin_in_user_coordinate_system=tuple(float(v) for v in origin_mm),
        gaze_origin_in_trackbox_coordinate_system=(0.5, 0.5, 0.5),
    )


def synth_sample(
    timestamp_us: int,
    norm_xy: Optional[Tuple[float, float]],
    origin_mm: Tuple[float, float, float] = DEFAULT_ORIGIN_MM,
    screen_mm: Optional[Tuple[float, float]] = None,
    device_timestamp_us: Optional[int] = None,
) -> GazeSample:
    """A binocular sample with both eyes at the same point (or both invalid)."""
    eye = synth_eye(norm_xy, origin_mm, screen_mm)
    return GazeSample(
        device_time_stamp=(
            device_timestamp_us if device_timestamp_us is not None else timestamp_us
        ),
        system_time_stamp=timestamp_us,
        left=eye,
        right=eye,
    )


def sample_at_image_point(
    timestamp_us: int,
    image_xy: Tuple[float, float],
    display: DisplaySample,
    origin_mm: Tuple[float, float, float] = DEFAULT_ORIGIN_MM,
) -> GazeSample:
    """A valid sample whose gaze maps to the given 512-px image point."""
    mx, my = image_to_monitor(image_xy, display)
    norm = (mx / display.monitor_width, my / display.monitor_height)
    return synth_sample(timestamp_us, norm, origin_mm=origin_mm)


def invalid_sample(timestamp_us: int) -> GazeSample:
    return synth_sample(timestamp_us, None)
