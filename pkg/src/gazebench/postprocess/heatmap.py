"""Gaze heatmap volumes: raw per-voxel sample counts, no blurring."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from gazebench.session.mapping import map_gaze_to_image
from gazebench.session.model import SessionRecording, ViewModality
from gazebench.volume.core import IN_PLANE_DIM, Modality, ScalarVolume, round_half_up
from gazebench.volume.mip import MipStack, mip_stack

AXIAL_MODALITIES = (ViewModality.PET, ViewModality.CT, ViewModality.FUSED)


@dataclass
class GazeHeatmapVolume:
    """Per-voxel gaze sample counts on the study's 512x512xnz grid."""

    counts: np.ndarray  # int64, indexed [x, y, z]

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass
class HeatmapReport:
    ticks: int = 0
    counted: int = 0
    skipped_invalid: int = 0       # invalid gaze or outside the window
    skipped_mip_view: int = 0      # MIP ticks have no axial z; kept separately
    skipped_out_of_range: int = 0  # slice_number outside the study grid


def build_heatmap(
    recording: SessionRecording, study_dims: Tuple[int, int, int]
) -> Tuple[GazeHeatmapVolume, HeatmapReport]:
    """Count every valid axial-view gaze tick into its (x, y, slice) voxel.

    Gaze-to-voxel rounding is half-up, clamped to the grid. The temporal
    dimension is flattened; values stay raw counts.
    """
    nx, ny, nz = study_dims
    counts = np.zeros((nx, ny, nz), dtype=np.int64)
    report = HeatmapReport()
    for gaze, display in zip(recording.tobii_cam, recording.common_cam):
        report.ticks += 1
        if display.modality not in AXIAL_MODALITIES:
            report.skipped_mip_view += 1
            continue
        point = map_gaze_to_image(gaze, display)
        if point is None:
            report.skipped_invalid += 1
            continue
        z = display.slice_number
        if not 0 <= z < nz:
            report.skipped_out_of_range += 1
            continue
        x = min(max(int(round_half_up(np.float64(point[0]))), 0), nx - 1)
        y = min(max(int(round_half_up(np.float64(point[1]))), 0), ny - 1)
        counts[x, y, z] += 1
        report.counted += 1
    return GazeHeatmapVolume(counts), report


def build_mip_view_heatmap(recording: SessionRecording) -> Dict[int, np.ndarray]:
    """Per-angle 2D counts for gaze that landed on the rotating MIP view."""
    out: Dict[int, np.ndarray] = {}
    for gaze, display in zip(recording.tobii_cam, recording.common_cam):
        if display.modality is not ViewModality.MIP:
            continue
        point = map_gaze_to_image(gaze, display)
        if point is None:
            continue
        angle = display.slice_number % 12
        plane = out.setdefault(
            angle, np.zeros((IN_PLANE_DIM, IN_PLANE_DIM), dtype=np.int64)
        )
        x = min(max(int(round_half_up(np.float64(point[0]))), 0), IN_PLANE_DIM - 1)
        y = min(max(int(round_half_up(np.float64(point[1]))), 0), IN_PLANE_DIM - 1)
        plane[x, y] += 1
    return out


def heatmap_mip(
    heatmap: GazeHeatmapVolume, spacing: Tuple[float, float, float]
) -> MipStack:
    """12-angle MIP of the 3D gaze heatmap volume."""
    vol = ScalarVolume(
        heatmap.counts.astype(np.float32), spacing, Modality.PET_SUV
    )
    return mip_stack(vol)
