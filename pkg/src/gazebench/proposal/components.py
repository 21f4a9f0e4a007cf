"""Thresholded 8-connected component extraction on PET slices."""

from __future__ import annotations

from typing import List, Tuple

import numpy as np
from scipy import ndimage

from gazebench.proposal.model import Bbox, CandidateBox

EIGHT_CONNECTED = np.ones((3, 3), dtype=np.intp)


def label_components(mask: np.ndarray) -> Tuple[np.ndarray, int]:
    """Label 8-connected components of a binary mask."""
    labels, count = ndimage.label(mask, structure=EIGHT_CONNECTED)
    return labels, int(count)


def threshold_components(
    pet_slice: np.ndarray, threshold: float, slice_number: int = 0
) -> List[CandidateBox]:
    """Components of {SUV >= threshold} as tight boxes with pixel counts.

    The slice array is indexed [x, y]. Output is ordered by (min-y, min-x),
    with box size and pixel count as further tie-breakers.
    """
    if threshold <= 0:
        raise ValueError(f"threshold must be > 0, got {threshold}")
    mask = np.asarray(pet_slice) >= threshold
    if not mask.any():
        return []
    labels, count = label_components(mask)
    slices = ndimage.find_objects(labels, max_label=count)
    counts = np.bincount(labels.ravel(), minlength=count + 1)
    out = []
    for label, sl in enumerate(slices, start=1):
        if sl is None:
            continue
        xs, ys = sl
        box = Bbox(
            x=int(xs.start),
            y=int(ys.start),
            w=int(xs.stop - xs.start),
            h=int(ys.stop - ys.start),
        )
        out.append(
            CandidateBox(
                box=box,
                slice_number=slice_number,
                suv_threshold=float(threshold),
                component_pixel_count=int(counts[label]),
            )
        )
    out.sort(
        key=lambda c: (c.box.y, c.box.x, c.box.w, c.box.h, c.component_pixel_count)
    )
    return out


def gaze_distance(box: Bbox, gaze: Tuple[float, float]) -> float:
    """Distance used for 'nearest to the last gaze' ranking."""
    return box.distance_to(gaze[0], gaze[1])


def nearest_candidate(
    candidates: List[CandidateBox], gaze: Tuple[float, float]
) -> CandidateBox:
    """Pick the gaze-nearest candidate; ties go to smaller area, then order."""
    best = None
    best_key = None
    for idx, cand in enumerate(candidates):
        key = (gaze_distance(cand.box, gaze), cand.box.area, idx)
        if best_key is None or key < best_key:
            best, best_key = cand, key
    if best is None:
        raise ValueError("no candidates to rank")
    return best
