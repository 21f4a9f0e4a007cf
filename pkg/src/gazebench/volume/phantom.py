"""Synthetic PET/CT phantoms with labeled ground-truth masks.

The phantom spec is a JSON document with fields: spheres[] (center_mm,
radius_mm, peak_suv), background_suv, dims, spacing_mm, noise_sigma, seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from gazebench.errors import PhantomSpecError
from gazebench.volume.core import Modality, ScalarVolume

# CT rendering of the phantom: water-ish background, soft-tissue spheres
CT_BACKGROUND_HU = 0.0
CT_SPHERE_HU = 60.0


@dataclass(frozen=True)
class Sphere:
    center_mm: Tuple[float, float, float]
    radius_mm: float
    peak_suv: float


@dataclass(frozen=True)
class PhantomSpec:
    spheres: Tuple[Sphere, ...]
    background_suv: float
    dims: Tuple[int, int, int]
    spacing_mm: Tuple[float, float, float]
    noise_sigma: float = 0.0
    seed: int = 0

    @classmethod
    def from_json(cls, doc: Union[str, dict, Path]) -> "PhantomSpec":
        if isinstance(doc, Path):
            doc = json.loads(doc.read_text())
        elif isinstance(doc, str):
            doc = json.loads(doc)
        spheres = tuple(
            Sphere(tuple(s["center_mm"]), float(s["radius_mm"]), float(s["peak_suv"]))
            for s in doc.get("spheres", [])
        )
        return cls(
            spheres=spheres,
            background_suv=float(doc["background_suv"]),
            dims=tuple(int(d) for d in doc["dims"]),
            spacing_mm=tuple(float(s) for s in doc["spacing_mm"]),
            noise_sigma=float(doc.get("noise_sigma", 0.0)),
            seed=int(doc.get("seed", 0)),
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "spheres": [
                    {
                        "center_mm": list(s.center_mm),
                        "radius_mm": s.radius_mm,
                        "peak_suv": s.peak_suv,
                    }
                    for s in self.spheres
                ],
                "background_suv": self.background_suv,
                "dims": list(self.dims),
                "spacing_mm": list(self.spacing_mm),
                "noise_sigma": self.noise_sigma,
                "seed": self.seed,
            },
            indent=2,
        ) + "\n"


def _sphere_mask(spec: PhantomSpec, sphere: Sphere) -> np.ndarray:
    """Voxels whose center lies inside the sphere."""
    nx, ny, nz = spec.dims
    sx, sy, sz = spec.spacing_mm
    xs = (np.arange(nx) * sx)[:, None, None]
    ys = (np.arange(ny) * sy)[None, :, None]
    zs = (np.arange(nz) * sz)[None, None, :]
    cx, cy, cz = sphere.center_mm
    d2 = (xs - cx) ** 2 + (ys - cy) ** 2 + (zs - cz) ** 2
    return d2 < sphere.radius_mm**2


def generate_phantom(spec: PhantomSpec) -> Tuple[ScalarVolume, ScalarVolume, np.ndarray]:
    """Build (pet, ct, truth_masks) for a phantom spec, deterministically.

    PET is background + (peak - background) inside each sphere (hard edge),
    plus optional Gaussian noise of the stated sigma, clipped at zero. The
    truth mask labels voxels whose center lies inside sphere k with k+1.
    """
    nx, ny, nz = spec.dims
    for sph in spec.spheres:
        if sph.peak_suv <= spec.background_suv:
            raise PhantomSpecError(
                f"sphere peak {sph.peak_suv} must exceed background {spec.background_suv}"
            )
        lo = [c - sph.radius_mm for c in sph.center_mm]
        hi = [c + sph.radius_mm for c in sph.center_mm]
        extent = [(d - 1) * s for d, s in zip(spec.dims, spec.spacing_mm)]
        if any(l < 0 for l in lo) or any(h > e for h, e in zip(hi, extent)):
            raise PhantomSpecError(f"sphere at {sph.center_mm} exceeds volume bounds")

    pet = np.full((nx, ny, nz), spec.background_suv, dtype=np.float32)
    ct = np.full((nx, ny, nz), CT_BACKGROUND_HU, dtype=np.float32)
    truth = np.zeros((nx, ny, nz), dtype=np.int16)
    for label, sph in enumerate(spec.spheres, start=1):
        mask = _sphere_mask(spec, sph)
        if np.any(truth[mask] != 0):
            raise PhantomSpecError(f"sphere {label} overlaps an earlier sphere")
        truth[mask] = label
        pet[mask] = sph.peak_suv
        ct[mask] = CT_SPHERE_HU

    if spec.noise_sigma > 0:
        rng = np.random.default_rng(spec.seed)
        pet = pet + rng.normal(0.0, spec.noise_sigma, size=pet.shape).astype(np.float32)
        np.clip(pet, 0.0, None, out=pet)

    pet_vol = ScalarVolume(pet, spec.spacing_mm, Modality.PET_SUV)
    ct_vol = ScalarVolume(ct, spec.spacing_mm, Modality.CT)
    return pet_vol, ct_vol, truth
