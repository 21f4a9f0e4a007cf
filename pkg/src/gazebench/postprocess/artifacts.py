"""Derived NIfTI artifacts per study: gaze volumes, their MIPs, pseudo-segs.

File names carry the reader-role suffix: GAZE_<role>.nii.gz,
GAZE_MIP_<role>.nii.gz, PSEUDO_SEG_<role>.nii.gz. Gaze recorded on the
rotating MIP view has no axial z and is kept apart in
GAZE_MIPVIEW_<role>.nii.gz (one 512x512 plane per viewed angle).
"""

from __future__ import annotations

from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from gazebench.postprocess.heatmap import (
    build_heatmap,
    build_mip_view_heatmap,
    heatmap_mip,
)
from gazebench.postprocess.pseudoseg import build_pseudo_seg
from gazebench.session.model import SessionRecording
from gazebench.volume.core import Modality, ScalarVolume
from gazebench.volume.nifti import save_volume


def write_gaze_artifacts(
    recording: SessionRecording,
    pet: ScalarVolume,
    role: str,
    out_dir: Union[str, Path],
) -> List[Path]:
    """Write GAZE_<role> and GAZE_MIP_<role> (+ MIP-view counts if any)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    heatmap, _ = build_heatmap(recording, pet.dims)
    paths = []

    gaze_path = out_dir / f"GAZE_{role}.nii.gz"
    save_volume(
        ScalarVolume(heatmap.counts.astype(np.float32), pet.spacing, Modality.PET_SUV),
        gaze_path,
    )
    paths.append(gaze_path)

    stack = heatmap_mip(heatmap, pet.spacing)
    mip_data = np.stack([p.astype(np.float32) for p in stack.projections], axis=2)
    mip_path = out_dir / f"GAZE_MIP_{role}.nii.gz"
    save_volume(ScalarVolume(mip_data, (1.0, 1.0, 1.0), Modality.PET_SUV), mip_path)
    paths.append(mip_path)

    mip_view = build_mip_view_heatmap(recording)
    if mip_view:
        planes = np.zeros((512, 512, 12), dtype=np.float32)
        for angle, counts in mip_view.items():
            planes[:, :, angle] = counts
        view_path = out_dir / f"GAZE_MIPVIEW_{role}.nii.gz"
        save_volume(ScalarVolume(planes, (1.0, 1.0, 1.0), Modality.PET_SUV), view_path)
        paths.append(view_path)
    return paths


def write_pseudo_seg_artifact(
    recording: SessionRecording,
    pet: ScalarVolume,
    role: str,
    out_dir: Union[str, Path],
) -> Tuple[Path, int]:
    """Write PSEUDO_SEG_<role>; returns (path, number of overlap conflicts)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = build_pseudo_seg(recording.lesions, pet)
    path = out_dir / f"PSEUDO_SEG_{role}.nii.gz"
    save_volume(ScalarVolume(result.labels, pet.spacing, Modality.CT), path)
    return path, len(result.conflicts)
