"""Slice and MIP rendering to PNG payloads for the UI."""

from __future__ import annotations

import io
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from PIL import Image

from gazebench.session.model import ViewModality
from gazebench.volume.core import DisplayWindow, ScalarVolume, axial_slice
from gazebench.volume.mip import MipStack


@lru_cache(maxsize=1)
def hot_lut() -> np.ndarray:
    """256-entry hot colormap (black->red->yellow->white), uint8 RGB."""
    x = np.linspace(0.0, 1.0, 256)
    r = np.clip(3.0 * x, 0, 1)
    g = np.clip(3.0 * x - 1.0, 0, 1)
    b = np.clip(3.0 * x - 2.0, 0, 1)
    return (np.stack([r, g, b], axis=1) * 255).astype(np.uint8)


def _to_png(img_rows: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(img_rows).save(buf, format="PNG")
    return buf.getvalue()


def grayscale_png(image_xy: np.ndarray) -> bytes:
    """8-bit [x, y]-indexed image to PNG (rows = y)."""
    return _to_png(np.ascontiguousarray(image_xy.T))


FUSED_ALPHA = 0.5


def fused_rgb(ct_u8: np.ndarray, pet_raw: np.ndarray, pet_window: DisplayWindow) -> np.ndarray:
    """CT grayscale underlay + hot-colormapped PET at fixed alpha above norm_min."""
    norm = (pet_raw - pet_window.norm_min) / (pet_window.norm_max - pet_window.norm_min)
    pet_u8 = np.clip(np.floor(norm * 255.0 + 0.5), 0, 255).astype(np.uint8)
    hot = hot_lut()[pet_u8]
    gray = np.repeat(ct_u8[:, :, None], 3, axis=2).astype(np.float64)
    alpha = FUSED_ALPHA * (pet_raw > pet_window.norm_min)[:, :, None]
    blended = gray * (1.0 - alpha) + hot.astype(np.float64) * alpha
    return np.clip(np.floor(blended + 0.5), 0, 255).astype(np.uint8)


def render_view_png(
    modality: ViewModality,
    slice_number: int,
    pet: ScalarVolume,
    ct: Optional[ScalarVolume],
    pet_window: DisplayWindow,
    ct_window: DisplayWindow,
    mip_stack_cache: Optional[MipStack] = None,
    mip_angle: int = 0,
) -> Tuple[bytes, Tuple[int, int]]:
    """PNG payload + (width, height) for the current view."""
    if modality is ViewModality.PET:
        img = axial_slice(pet, slice_number, pet_window)
        return grayscale_png(img), img.shape
    if modality is ViewModality.CT:
        vol = ct if ct is not None else pet
        img = axial_slice(vol, slice_number, ct_window)
        return grayscale_png(img), img.shape
    if modality is ViewModality.FUSED:
        vol = ct if ct is not None else pet
        ct_u8 = axial_slice(vol, slice_number, ct_window)
        rgb = fused_rgb(ct_u8, pet.slice_data(slice_number), pet_window)
        return _to_png(np.ascontiguousarray(np.transpose(rgb, (1, 0, 2)))), rgb.shape[:2]
    if modality is ViewModality.MIP:
        if mip_stack_cache is None:
            raise ValueError("MIP view needs a computed projection stack")
        proj = mip_stack_cache.projections[mip_angle % 12]
        norm = (proj - pet_window.norm_min) / (pet_window.norm_max - pet_window.norm_min)
        u8 = np.clip(np.floor(norm * 255.0 + 0.5), 0, 255).astype(np.uint8)
        return _to_png(u8), (u8.shape[1], u8.shape[0])
    raise ValueError(f"unknown modality {modality}")
