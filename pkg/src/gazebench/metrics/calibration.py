"""Task-specific gaze calibration quality from annotation recordings.

For each accepted lesion, the gaze samples of the last 0.25 s leading up to
its select keystroke are compared against the root-slice box center:
accuracy is the mean angular deviation, precision the RMS angle between
consecutive samples. Last-gaze and closest-gaze angles are reported per
lesion alongside the aggregates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from gazebench.errors import EmptyReportError
from gazebench.metrics.geometry import ViewingGeometry, angle_between
from gazebench.session.mapping import image_to_monitor, monitor_point
from gazebench.session.model import GazeSample, SessionRecording

CALIBRATION_WINDOW_US = 250_000


@dataclass
class LesionCalibration:
    lesion_id: int
    n_samples: int
    accuracy_deg: float
    precision_deg: float
    last_gaze_deg: float
    closest_gaze_deg: float


@dataclass
class CalibrationReport:
    records: List[LesionCalibration]
    skipped_lesions: int = 0

    METRICS = ("accuracy_deg", "precision_deg", "last_gaze_deg", "closest_gaze_deg")

    def aggregate(self, metric: str) -> Dict[str, float]:
        values = np.array([getattr(r, metric) for r in self.records], dtype=np.float64)
        return {
            "mean": float(values.mean()),
            "std": float(values.std()),  # population std
            "median": float(np.median(values)),
            "min": float(values.min()),
            "max": float(values.max()),
        }

    def to_dict(self) -> dict:
        return {
            "n_lesions": len(self.records),
            "skipped_lesions": self.skipped_lesions,
            "aggregates": {m: self.aggregate(m) for m in self.METRICS},
            "records": [vars(r) for r in self.records],
        }

    def table_rows(self) -> List[List[str]]:
        """Rows mirroring the published calibration table layout."""
        rows = [["metric", "mean", "std", "median", "min", "max"]]
        for metric in self.METRICS:
            agg = self.aggregate(metric)
            rows.append(
                [metric]
                + [f"{agg[k]:.3f}" for k in ("mean", "std", "median", "min", "max")]
            )
        return rows


def _valid_origin(gaze: GazeSample) -> Optional[Tuple[float, float, float]]:
    origins = []
    for eye in (gaze.left, gaze.right):
        if eye.gaze_point_validity != 1:
            continue
        origin = eye.gaze_origin_in_user_coordinate_system
        if any(math.isnan(v) for v in origin):
            continue
        origins.append(origin)
    if not origins:
        return None
    return tuple(float(np.mean([o[i] for o in origins])) for i in range(3))


def _midpoint(a, b):
    return tuple((ai + bi) / 2.0 for ai, bi in zip(a, b))


def calibration_metrics(
    recording: SessionRecording,
    geom: ViewingGeometry,
    window_us: int = CALIBRATION_WINDOW_US,
) -> CalibrationReport:
    """Per-lesion angular accuracy/precision over the pre-select window."""
    records: List[LesionCalibration] = []
    skipped = 0
    for lesion in recording.lesions:
        display = recording.lesion_displays.get(lesion.lesion_id)
        if display is None:
            skipped += 1
            continue
        t_sel = lesion.select_time_us
        window = []
        for gaze, tick_display in zip(recording.tobii_cam, recording.common_cam):
            ts = gaze.system_time_stamp
            if ts > t_sel or ts < t_sel - window_us:
                continue
            point = monitor_point(gaze, tick_display)
            origin = _valid_origin(gaze)
            if point is None or origin is None:
                continue
            window.append((point, origin))
        if len(window) < 2:
            skipped += 1
            continue

        root_box = lesion.slice_boxes[lesion.root_slice].box
        target = image_to_monitor(root_box.center, display)

        angles = [angle_between(origin, point, target, geom) for point, origin in window]
        steps = [
            angle_between(_midpoint(o1, o2), p1, p2, geom)
            for (p1, o1), (p2, o2) in zip(window, window[1:])
        ]
        records.append(
            LesionCalibration(
                lesion_id=lesion.lesion_id,
                n_samples=len(window),
                accuracy_deg=float(np.mean(angles)),
                precision_deg=float(np.sqrt(np.mean(np.square(steps)))),
                last_gaze_deg=angles[-1],
                closest_gaze_deg=min(angles),
            )
        )
    if not records:
        raise EmptyReportError(
            "no accepted lesion has >= 2 valid gaze samples in the pre-select window"
        )
    return CalibrationReport(records=records, skipped_lesions=skipped)
