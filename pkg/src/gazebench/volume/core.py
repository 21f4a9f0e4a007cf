"""Scalar volumes, display windowing and axial slicing.

Array convention used throughout the package: volume data is indexed
``data[x, y, z]`` (x fastest-varying on disk, matching the NIfTI layout),
so an axial slice is ``data[:, :, k]`` indexed ``[x, y]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from gazebench.errors import BoundsError

IN_PLANE_DIM = 512


class Modality(Enum):
    CT = "CT"
    PET_SUV = "PET_SUV"


@dataclass(frozen=True)
class ScalarVolume:
    """A 3D voxel grid of HU (CT) or SUV (PET) values with geometry metadata.

    Attributes:
        data: float array indexed [x, y, z]
        spacing: voxel size (sx, sy, sz) in mm
        modality_kind: Modality.CT or Modality.PET_SUV
    """

    data: np.ndarray
    spacing: Tuple[float, float, float]
    modality_kind: Modality

    def __post_init__(self):
        if self.data.ndim != 3:
            raise ValueError(f"volume data must be 3D, got shape {self.data.shape}")
        if any(d < 1 for d in self.data.shape):
            raise ValueError(f"all dims must be >= 1, got {self.data.shape}")
        if any(s <= 0 for s in self.spacing):
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        if self.modality_kind is Modality.PET_SUV and float(self.data.min()) < 0:
            raise ValueError("PET SUV values must be non-negative")
        object.__setattr__(self, "spacing", tuple(float(s) for s in self.spacing))

    @property
    def dims(self) -> Tuple[int, int, int]:
        return self.data.shape

    @property
    def nz(self) -> int:
        return self.data.shape[2]

    def slice_data(self, slice_number: int) -> np.ndarray:
        if not 0 <= slice_number < self.nz:
            raise BoundsError(f"slice {slice_number} outside [0, {self.nz})")
        return self.data[:, :, slice_number]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ScalarVolume):
            return NotImplemented
        return (
            self.modality_kind is other.modality_kind
            and self.spacing == other.spacing
            and self.data.shape == other.data.shape
            and self.data.dtype == other.data.dtype
            and bool(np.array_equal(self.data, other.data))
        )


@dataclass(frozen=True)
class DisplayWindow:
    """Value range mapped to display black..white, plus the CT preset slot."""

    norm_min: float
    norm_max: float
    ct_window_preset: Optional[int] = None

    def __post_init__(self):
        if not self.norm_min < self.norm_max:
            raise ValueError(
                f"norm_min must be < norm_max, got [{self.norm_min}, {self.norm_max}]"
            )
        if self.ct_window_preset is not None and not 1 <= self.ct_window_preset <= 9:
            raise ValueError(f"ct_window_preset must be 1..9, got {self.ct_window_preset}")


def round_half_up(values: np.ndarray) -> np.ndarray:
    """Round to nearest integer with .5 going up (bit-stable display mapping)."""
    return np.floor(np.asarray(values, dtype=np.float64) + 0.5)


def axial_slice(vol: ScalarVolume, slice_number: int, window: DisplayWindow) -> np.ndarray:
    """Render one axial slice to an 8-bit image (indexed [x, y]).

    pixel = clamp((value - norm_min) / (norm_max - norm_min), 0, 1) * 255,
    rounded half-up.
    """
    raw = vol.slice_data(slice_number).astype(np.float64)
    norm = (raw - window.norm_min) / (window.norm_max - window.norm_min)
    np.clip(norm, 0.0, 1.0, out=norm)
    return round_half_up(norm * 255.0).astype(np.uint8)


def bilinear_resample_2d(plane: np.ndarray, out_shape: Tuple[int, int]) -> np.ndarray:
    """Bilinear resample of a 2D array; corners map to corners exactly."""
    nx, ny = plane.shape
    ox, oy = out_shape
    sx = np.linspace(0.0, nx - 1, ox) if ox > 1 else np.zeros(1)
    sy = np.linspace(0.0, ny - 1, oy) if oy > 1 else np.zeros(1)
    x0 = np.clip(np.floor(sx).astype(np.intp), 0, nx - 1)
    y0 = np.clip(np.floor(sy).astype(np.intp), 0, ny - 1)
    x1 = np.minimum(x0 + 1, nx - 1)
    y1 = np.minimum(y0 + 1, ny - 1)
    fx = (sx - x0)[:, None]
    fy = (sy - y0)[None, :]
    p00 = plane[np.ix_(x0, y0)]
    p10 = plane[np.ix_(x1, y0)]
    p01 = plane[np.ix_(x0, y1)]
    p11 = plane[np.ix_(x1, y1)]
    top = p00 * (1 - fx) + p10 * fx
    bot = p01 * (1 - fx) + p11 * fx
    return top * (1 - fy) + bot * fy


def upsample_in_plane(vol: ScalarVolume, target: int = IN_PLANE_DIM) -> ScalarVolume:
    """Resample every axial plane to target x target by bilinear interpolation."""
    nx, ny, nz = vol.dims
    if (nx, ny) == (target, target):
        return vol
    out = np.empty((target, target, nz), dtype=np.float32)
    for k in range(nz):
        out[:, :, k] = bilinear_resample_2d(
            vol.data[:, :, k].astype(np.float64), (target, target)
        )
    # resampled spacing keeps the physical extent of the original grid
    sx = vol.spacing[0] * nx / target
    sy = vol.spacing[1] * ny / target
    if vol.modality_kind is Modality.PET_SUV:
        np.clip(out, 0.0, None, out=out)
    return ScalarVolume(out, (sx, sy, vol.spacing[2]), vol.modality_kind)
