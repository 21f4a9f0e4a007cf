"""Pseudo-segmentation volumes re-derived from per-slice SUV thresholds."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from gazebench.proposal.components import label_components
from gazebench.proposal.model import LesionAnnotation
from gazebench.volume.core import ScalarVolume

log = logging.getLogger(__name__)


@dataclass
class SegConflict:
    slice_number: int
    earlier_lesion: int
    later_lesion: int
    voxels: int


@dataclass
class PseudoSegResult:
    labels: np.ndarray  # int16, lesion ordinal per voxel, 0 = background
    conflicts: List[SegConflict] = field(default_factory=list)
    empty_boxes: List[Tuple[int, int]] = field(default_factory=list)  # (lesion, slice)


def build_pseudo_seg(
    lesions: List[LesionAnnotation], pet: ScalarVolume
) -> PseudoSegResult:
    """Label voxels inside each lesion's boxes that clear its SUV threshold.

    For each slice box the slice is re-thresholded at the recorded value and
    restricted to the 8-connected component(s) intersecting the box interior,
    clipped to the box. Overlaps resolve later-accepted-wins, with a
    machine-readable conflict record.
    """
    labels = np.zeros(pet.dims, dtype=np.int16)
    result = PseudoSegResult(labels)
    for ordinal, lesion in enumerate(lesions, start=1):
        for slice_number in sorted(lesion.slice_boxes):
            sb = lesion.slice_boxes[slice_number]
            if not 0 <= slice_number < pet.nz:
                result.empty_boxes.append((lesion.lesion_id, slice_number))
                continue
            plane = pet.slice_data(slice_number)
            mask = plane >= sb.suv_threshold
            b = sb.box
            box_region = mask[b.x : b.x + b.w, b.y : b.y + b.h]
            if not box_region.any():
                result.empty_boxes.append((lesion.lesion_id, slice_number))
                log.warning(
                    "lesion %d slice %d: no voxel clears threshold %.4g inside its box",
                    lesion.lesion_id, slice_number, sb.suv_threshold,
                )
                continue
            comp_labels, _ = label_components(mask)
            inside = np.unique(comp_labels[b.x : b.x + b.w, b.y : b.y + b.h])
            inside = inside[inside > 0]
            pick = np.isin(comp_labels, inside)
            pick_box = np.zeros_like(pick)
            pick_box[b.x : b.x + b.w, b.y : b.y + b.h] = pick[
                b.x : b.x + b.w, b.y : b.y + b.h
            ]
            target = labels[:, :, slice_number]
            clobbered = target[pick_box]
            overwritten = clobbered[(clobbered != 0) & (clobbered != ordinal)]
            if overwritten.size:
                for earlier in np.unique(overwritten):
                    result.conflicts.append(
                        SegConflict(
                            slice_number=slice_number,
                            earlier_lesion=int(earlier),
                            later_lesion=ordinal,
                            voxels=int((overwritten == earlier).sum()),
                        )
                    )
            target[pick_box] = ordinal
    return result
