"""Annotation domain types: boxes, candidates, lesions, machine state."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple


class Certainty(Enum):
    CERTAIN = "certain"
    UNCERTAIN = "uncertain"


class SliceStatus(Enum):
    VALIDATED = "validated"
    EXTRAPOLATED = "extrapolated"


class Mode(Enum):
    BROWSING = "browsing"
    CONFIRMATION = "confirmation"


@dataclass(frozen=True)
class Bbox:
    """xywh box in 512-px image coordinates (x along the first array axis)."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise ValueError(f"box must have w,h >= 1, got {self}")

    @property
    def area(self) -> int:
        return self.w * self.h

    @property
    def center(self) -> Tuple[float, float]:
        return (self.x + (self.w - 1) / 2.0, self.y + (self.h - 1) / 2.0)

    def contains(self, px: float, py: float) -> bool:
        return self.x <= px <= self.x + self.w - 1 and self.y <= py <= self.y + self.h - 1

    def distance_to(self, px: float, py: float) -> float:
        """Zero inside the box, else Euclidean distance to the nearest edge."""
        dx = max(self.x - px, px - (self.x + self.w - 1), 0.0)
        dy = max(self.y - py, py - (self.y + self.h - 1), 0.0)
        return math.hypot(dx, dy)

    def iou(self, other: "Bbox") -> float:
        ix = min(self.x + self.w, other.x + other.w) - max(self.x, other.x)
        iy = min(self.y + self.h, other.y + other.h) - max(self.y, other.y)
        if ix <= 0 or iy <= 0:
            return 0.0
        inter = ix * iy
        return inter / float(self.area + other.area - inter)


@dataclass(frozen=True)
class CandidateBox:
    """One thresholded connected component offered for confirmation."""

    box: Bbox
    slice_number: int
    suv_threshold: float
    component_pixel_count: int

    def __post_init__(self):
        if self.suv_threshold <= 0:
            raise ValueError(f"threshold must be > 0, got {self.suv_threshold}")
        if self.component_pixel_count < 1:
            raise ValueError("component must contain at least one pixel")


@dataclass(frozen=True)
class SliceBox:
    box: Bbox
    status: SliceStatus
    suv_threshold: float


@dataclass
class LesionAnnotation:
    """One 3D lesion: validated root box plus propagated per-slice boxes."""

    lesion_id: int
    certainty: Certainty
    root_slice: int
    suv_threshold: float
    slice_boxes: Dict[int, SliceBox]
    select_gaze: Tuple[float, float]  # display (monitor) coords at the select key
    select_time_us: int = 0  # system timestamp of the select keystroke

    def __post_init__(self):
        root = self.slice_boxes.get(self.root_slice)
        if root is None or root.status is not SliceStatus.VALIDATED:
            raise ValueError("root slice must be present and validated")
        slices = sorted(self.slice_boxes)
        if slices != list(range(slices[0], slices[-1] + 1)):
            raise ValueError(f"slice range must be contiguous, got {slices}")

    @property
    def slice_range(self) -> Tuple[int, int]:
        slices = sorted(self.slice_boxes)
        return slices[0], slices[-1]


@dataclass
class PendingCandidate:
    candidate: CandidateBox
    certainty: Certainty
    select_gaze_display: Tuple[float, float]
    select_gaze_image: Tuple[float, float]
    at_limit: bool = False


@dataclass
class AnnotationState:
    accepted: List[LesionAnnotation] = field(default_factory=list)
    rejected_boxes: List[Tuple[int, Bbox]] = field(default_factory=list)
    pending: Optional[PendingCandidate] = None
    next_lesion_id: int = 1

    @property
    def mode(self) -> Mode:
        return Mode.CONFIRMATION if self.pending is not None else Mode.BROWSING

    def accepted_boxes_on(self, slice_number: int) -> List[Bbox]:
        return [
            sb.box
            for lesion in self.accepted
            for s, sb in lesion.slice_boxes.items()
            if s == slice_number
        ]

    def rejected_boxes_on(self, slice_number: int) -> List[Bbox]:
        return [b for s, b in self.rejected_boxes if s == slice_number]
