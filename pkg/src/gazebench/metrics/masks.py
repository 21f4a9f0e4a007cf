"""Segmentation-mask metrics and gaze-correction evaluation measures."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from gazebench.metrics.geometry import ViewingGeometry, min_angle_to_pixels
from gazebench.volume.core import round_half_up


def dice(a: np.ndarray, b: np.ndarray) -> float:
    """2|A n B| / (|A| + |B|); two empty masks count as perfect overlap."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    total = int(a.sum()) + int(b.sum())
    if total == 0:
        return 1.0
    return 2.0 * int(np.logical_and(a, b).sum()) / total


def lesion_pr(pred_mask: np.ndarray, truth_mask: np.ndarray) -> Tuple[float, float]:
    """Lesion-level precision/recall: labeled regions matched at overlap > 0.

    Distinct nonzero labels are the lesions; matching is greedy by voxel
    overlap, one-to-one.
    """
    pred = np.asarray(pred_mask)
    truth = np.asarray(truth_mask)
    if pred.shape != truth.shape:
        raise ValueError(f"shape mismatch {pred.shape} vs {truth.shape}")
    pred_labels = [int(v) for v in np.unique(pred) if v != 0]
    truth_labels = [int(v) for v in np.unique(truth) if v != 0]

    overlaps = []
    for i, pl in enumerate(pred_labels):
        pmask = pred == pl
        for j, tl in enumerate(truth_labels):
            count = int(np.logical_and(pmask, truth == tl).sum())
            if count > 0:
                overlaps.append((count, i, j))
    overlaps.sort(key=lambda t: (-t[0], t[1], t[2]))
    taken_p: set = set()
    taken_t: set = set()
    tp = 0
    for _, i, j in overlaps:
        if i in taken_p or j in taken_t:
            continue
        taken_p.add(i)
        taken_t.add(j)
        tp += 1
    precision = tp / len(pred_labels) if pred_labels else 1.0
    recall = tp / len(truth_labels) if truth_labels else 1.0
    return precision, recall


def mean_point_to_mask(
    point: Tuple[float, float], mask_pixels: Iterable[Tuple[float, float]]
) -> float:
    """Mean Euclidean distance from a point to every pixel of a mask."""
    pixels = np.asarray(list(mask_pixels), dtype=np.float64)
    if pixels.size == 0:
        raise ValueError("mask must be nonempty")
    deltas = pixels - np.asarray(point, dtype=np.float64)[None, :]
    return float(np.mean(np.hypot(deltas[:, 0], deltas[:, 1])))


@dataclass(frozen=True)
class GazeCorrectionCase:
    """One evaluation window, in monitor pixel coordinates."""

    predicted_px: Tuple[float, float]
    last_gaze_px: Tuple[float, float]
    mask_pixels_px: Tuple[Tuple[int, int], ...]
    origin_mm: Tuple[float, float, float] = (0.0, 0.0, 650.0)


@dataclass
class GazeCorrectionResult:
    on_mask_pct: float        # fraction of predictions landing on a mask pixel
    improved_pct: float       # strictly angularly closer than the last gaze
    mean_angle_deg: float     # mean angle from prediction to nearest mask pixel


def gaze_correction_eval(
    cases: Sequence[GazeCorrectionCase], geom: ViewingGeometry
) -> GazeCorrectionResult:
    if not cases:
        raise ValueError("no cases to evaluate")
    on_mask = 0
    improved = 0
    angles: List[float] = []
    for case in cases:
        if not case.mask_pixels_px:
            raise ValueError("every case needs a nonempty mask")
        mask = np.asarray(case.mask_pixels_px, dtype=np.float64)
        px = int(round_half_up(np.float64(case.predicted_px[0])))
        py = int(round_half_up(np.float64(case.predicted_px[1])))
        if (px, py) in {(int(x), int(y)) for x, y in case.mask_pixels_px}:
            on_mask += 1
        pred_angle = min_angle_to_pixels(case.origin_mm, case.predicted_px, mask, geom)
        last_angle = min_angle_to_pixels(case.origin_mm, case.last_gaze_px, mask, geom)
        if pred_angle < last_angle:
            improved += 1
        angles.append(pred_angle)
    n = len(cases)
    return GazeCorrectionResult(
        on_mask_pct=on_mask / n,
        improved_pct=improved / n,
        mean_angle_deg=float(np.mean(angles)),
    )
