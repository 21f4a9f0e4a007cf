"""Session domain types: 60Hz samples, key events, the synced recording."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Tuple

from gazebench.errors import IntegrityError
from gazebench.proposal.model import LesionAnnotation


class ViewModality(Enum):
    PET = "PET"
    CT = "CT"
    FUSED = "fused"
    MIP = "MIP"


def _nan_eq(a, b) -> bool:
    if isinstance(a, float) and isinstance(b, float):
        return a == b or (math.isnan(a) and math.isnan(b))
    if isinstance(a, (tuple, list)) and isinstance(b, (tuple, list)):
        return len(a) == len(b) and all(_nan_eq(x, y) for x, y in zip(a, b))
    return a == b


@dataclass(frozen=True)
class EyeSample:
    """One eye's tracker fields; invalid eyes carry NaN coordinates."""

    gaze_point_on_display_area: Tuple[float, float]
    gaze_point_in_user_coordinate_system: Tuple[float, float, float]
    gaze_point_validity: int
    pupil_diameter: float
    pupil_validity: int
    gaze_origin_in_user_coordinate_system: Tuple[float, float, float]
    gaze_origin_in_trackbox_coordinate_system: Tuple[float, float, float]

    def __eq__(self, other):
        if not isinstance(other, EyeSample):
            return NotImplemented
        return all(
            _nan_eq(getattr(self, f), getattr(other, f))
            for f in self.__dataclass_fields__
        )

    @classmethod
    def invalid(cls) -> "EyeSample":
        nan = float("nan")
        return cls(
            gaze_point_on_display_area=(nan, nan),
            gaze_point_in_user_coordinate_system=(nan, nan, nan),
            gaze_point_validity=0,
            pupil_diameter=nan,
            pupil_validity=0,
            gaze_origin_in_user_coordinate_system=(nan, nan, nan),
            gaze_origin_in_trackbox_coordinate_system=(nan, nan, nan),
        )


@dataclass(frozen=True)
class GazeSample:
    device_time_stamp: int
    system_time_stamp: int
    left: EyeSample
    right: EyeSample
    extra: tuple = ()  # unknown JSON fields, preserved as (key, value) pairs

    def __eq__(self, other):
        if not isinstance(other, GazeSample):
            return NotImplemented
        return (
            self.device_time_stamp == other.device_time_stamp
            and self.system_time_stamp == other.system_time_stamp
            and self.left == other.left
            and self.right == other.right
            and self.extra == other.extra
        )


@dataclass(frozen=True)
class DisplaySample:
    """Display state captured with each gaze tick.

    For MIP views slice_number records the MIP angle index (0..11); axial
    views record the axial slice index.
    """

    slice_number: int
    modality: ViewModality
    norm_min: float
    norm_max: float
    window_x: int
    window_y: int
    window_width: int
    window_height: int
    monitor_width: int
    monitor_height: int
    ct_window: int
    extra: tuple = ()

    def __post_init__(self):
        if self.window_width <= 0 or self.window_height <= 0:
            raise ValueError("window dims must be positive")
        if (
            self.window_x < 0
            or self.window_y < 0
            or self.window_x + self.window_width > self.monitor_width
            or self.window_y + self.window_height > self.monitor_height
        ):
            raise ValueError("window rectangle must lie within the monitor")


@dataclass(frozen=True)
class KeyEvent:
    system_time_stamp: int
    key_code: int
    extra: tuple = ()


@dataclass
class SessionHeader:
    monitor_width: int
    monitor_height: int
    display_window_dim: Tuple[int, int]
    case_difficulty: int = 0
    ui_experience: int = 0
    comment: str = ""


@dataclass
class SessionRecording:
    """The synchronized triple of gaze/display/pauses plus keys and lesions."""

    header: SessionHeader
    tobii_cam: List[GazeSample] = field(default_factory=list)
    common_cam: List[DisplaySample] = field(default_factory=list)
    pauses: List[bool] = field(default_factory=list)
    key_events: List[KeyEvent] = field(default_factory=list)
    lesions: List[LesionAnnotation] = field(default_factory=list)
    # select-time display sample per lesion id (sets the box pixel scale)
    lesion_displays: Dict[int, DisplaySample] = field(default_factory=dict)
    lesion_extras: Dict[int, tuple] = field(default_factory=dict)
    extra: Dict[str, dict] = field(default_factory=dict)  # per-file unknown fields

    def validate(self) -> None:
        lengths = (len(self.tobii_cam), len(self.common_cam), len(self.pauses))
        if len(set(lengths)) != 1:
            raise IntegrityError(
                f"synced lists must have equal lengths, got "
                f"tobii_cam={lengths[0]} common_cam={lengths[1]} pauses={lengths[2]}"
            )

    @property
    def n_ticks(self) -> int:
        return len(self.tobii_cam)
