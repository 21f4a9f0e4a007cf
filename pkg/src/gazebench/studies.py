"""Study directory layout: pet.nii.gz / ct.nii.gz (+ truth for phantoms)."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from gazebench.volume import Modality, PhantomSpec, ScalarVolume, generate_phantom
from gazebench.volume.nifti import load_volume, save_volume

PET_FILE = "pet.nii.gz"
CT_FILE = "ct.nii.gz"
TRUTH_FILE = "truth.nii.gz"
PHANTOM_SPEC_FILE = "phantom.json"
DATA_ROOT_ENV = "GAZEBENCH_DATA_ROOT"


@dataclass
class Study:
    path: Path
    pet: ScalarVolume
    ct: Optional[ScalarVolume]
    truth: Optional[ScalarVolume] = None


def data_root(default: Union[str, Path, None] = None) -> Path:
    root = os.environ.get(DATA_ROOT_ENV) or default
    if root is None:
        raise FileNotFoundError(
            f"no data root: set {DATA_ROOT_ENV} or pass --data-root"
        )
    return Path(root)


def resolve_study(path: Union[str, Path], root: Union[str, Path, None] = None) -> Path:
    path = Path(path)
    if path.is_dir():
        return path
    if root is not None and (Path(root) / path).is_dir():
        return Path(root) / path
    raise FileNotFoundError(f"study directory not found: {path}")


def load_study(path: Union[str, Path], with_truth: bool = False) -> Study:
    path = Path(path)
    pet_path = path / PET_FILE
    if not pet_path.exists():
        raise FileNotFoundError(f"study has no {PET_FILE}: {path}")
    pet = load_volume(pet_path, Modality.PET_SUV)
    ct = None
    if (path / CT_FILE).exists():
        ct = load_volume(path / CT_FILE, Modality.CT)
    truth = None
    if with_truth and (path / TRUTH_FILE).exists():
        truth = load_volume(path / TRUTH_FILE, Modality.CT)
    return Study(path=path, pet=pet, ct=ct, truth=truth)


def write_phantom_study(spec: PhantomSpec, out_dir: Union[str, Path]) -> Path:
    """Generate and persist a phantom study directory."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    pet, ct, truth = generate_phantom(spec)
    save_volume(pet, out_dir / PET_FILE)
    save_volume(ct, out_dir / CT_FILE)
    truth_vol = ScalarVolume(truth, spec.spacing_mm, Modality.CT)
    save_volume(truth_vol, out_dir / TRUTH_FILE)
    (out_dir / PHANTOM_SPEC_FILE).write_text(spec.to_json())
    return out_dir
