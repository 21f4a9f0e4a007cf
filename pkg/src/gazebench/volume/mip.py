"""Rotating maximum intensity projections about the superior-inferior axis."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

from gazebench.volume.core import Modality, ScalarVolume

MIP_ANGLES_DEG = tuple(range(0, 360, 30))


@dataclass(frozen=True)
class MipStack:
    """12 azimuthal max projections; each image is (nz_display, 512), rows = z."""

    angles_deg: tuple
    projections: List[np.ndarray]

    def __post_init__(self):
        if len(self.angles_deg) != len(self.projections):
            raise ValueError("one projection per angle required")

    @property
    def global_max(self) -> float:
        return float(max(p.max() for p in self.projections))


def _rotate_in_plane(data: np.ndarray, theta_rad: float) -> np.ndarray:
    """Rotate each axial plane about the in-plane center, bilinear, zero fill."""
    nx, ny, nz = data.shape
    cx, cy = (nx - 1) / 2.0, (ny - 1) / 2.0
    xs, ys = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    # sample source coordinate = inverse rotation of the output coordinate
    cos_t, sin_t = np.cos(theta_rad), np.sin(theta_rad)
    dx, dy = xs - cx, ys - cy
    src_x = cos_t * dx + sin_t * dy + cx
    src_y = -sin_t * dx + cos_t * dy + cy

    x0 = np.floor(src_x).astype(np.intp)
    y0 = np.floor(src_y).astype(np.intp)
    fx = (src_x - x0)[:, :, None]
    fy = (src_y - y0)[:, :, None]

    out = np.zeros((nx, ny, nz), dtype=np.float64)
    corners = ((x0, y0, (1 - fx) * (1 - fy)), ((x0 + 1), y0, fx * (1 - fy)),
               (x0, (y0 + 1), (1 - fx) * fy), ((x0 + 1), (y0 + 1), fx * fy))
    for cx_idx, cy_idx, weight in corners:
        inside = (cx_idx >= 0) & (cx_idx < nx) & (cy_idx >= 0) & (cy_idx < ny)
        xi = np.clip(cx_idx, 0, nx - 1)
        yi = np.clip(cy_idx, 0, ny - 1)
        out += np.where(inside[:, :, None], data[xi, yi, :] * weight, 0.0)
    return out


def _aspect_correct_rows(proj: np.ndarray, sz: float, sx: float) -> np.ndarray:
    """Scale row count by sz/sx without interpolating values.

    Each output row covers a contiguous bin of source rows and takes their
    max; upscaling degenerates to nearest-neighbor replication. Either way
    every output value is an original projection value, so maxima survive.
    """
    nz = proj.shape[0]
    n_rows = max(1, int(round(nz * sz / sx)))
    if n_rows == nz:
        return proj
    edges = (np.arange(n_rows + 1) * nz) // n_rows
    return np.stack(
        [proj[edges[i] : max(edges[i + 1], edges[i] + 1), :].max(axis=0)
         for i in range(n_rows)]
    )


def mip_stack(vol: ScalarVolume) -> MipStack:
    """Max-project a PET volume from 12 azimuths (0, 30, ..., 330 degrees).

    For each angle the volume is rotated about the z axis (bilinear in-plane
    resampling, zero fill outside) and collapsed by max along the
    anterior-posterior (y) axis. Rows are then rescaled by sz/sx so the body
    appears upright with correct aspect.
    """
    if vol.modality_kind is not Modality.PET_SUV:
        raise ValueError("MIP stacks are computed from PET_SUV volumes")
    sx, _, sz = vol.spacing
    data = vol.data.astype(np.float64)
    projections = []
    for theta_deg in MIP_ANGLES_DEG:
        rotated = data if theta_deg == 0 else _rotate_in_plane(
            data, np.deg2rad(theta_deg)
        )
        proj = rotated.max(axis=1)  # collapse anterior-posterior -> (nx, nz)
        proj = proj.T[::-1, :]  # rows = z, top row = superior
        projections.append(np.ascontiguousarray(_aspect_correct_rows(proj, sz, sx)))
    return MipStack(MIP_ANGLES_DEG, projections)
