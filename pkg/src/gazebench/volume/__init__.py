"""Volume handling: NIfTI I/O, windowing, slicing, MIPs and synthetic phantoms."""

from gazebench.volume.core import DisplayWindow, Modality, ScalarVolume, axial_slice
from gazebench.volume.mip import MipStack, mip_stack
from gazebench.volume.nifti import load_volume, save_volume
from gazebench.volume.phantom import PhantomSpec, Sphere, generate_phantom

__all__ = [
    "DisplayWindow",
    "Modality",
    "MipStack",
    "PhantomSpec",
    "ScalarVolume",
    "Sphere",
    "axial_slice",
    "generate_phantom",
    "load_volume",
    "mip_stack",
    "save_volume",
]
