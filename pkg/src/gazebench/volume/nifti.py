"""Minimal NIfTI-1 reader/writer.

Deliberate subset: single-file .nii / .nii.gz, datatypes int16 / uint16 /
float32 / float64, extensions skipped, qform/sform used only to permute
and flip axes into a canonical RAS-like layout (axial index grows
foot-to-head). Both endiannesses are read; files are written native-endian.
"""

from __future__ import annotations

import gzip
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from gazebench.errors import FormatError, UnsupportedError
from gazebench.volume.core import IN_PLANE_DIM, Modality, ScalarVolume, upsample_in_plane

HEADER_SIZE = 348
MAGIC_SINGLE = b"n+1\x00"

_HEADER_DTD = [
    ("sizeof_hdr", "i4"),
    ("data_type", "S10"),
    ("db_name", "S18"),
    ("extents", "i4"),
    ("session_error", "i2"),
    ("regular", "S1"),
    ("dim_info", "u1"),
    ("dim", "i2", (8,)),
    ("intent_p1", "f4"),
    ("intent_p2", "f4"),
    ("intent_p3", "f4"),
    ("intent_code", "i2"),
    ("datatype", "i2"),
    ("bitpix", "i2"),
    ("slice_start", "i2"),
    ("pixdim", "f4", (8,)),
    ("vox_offset", "f4"),
    ("scl_slope", "f4"),
    ("scl_inter", "f4"),
    ("slice_end", "i2"),
    ("slice_code", "u1"),
    ("xyzt_units", "u1"),
    ("cal_max", "f4"),
    ("cal_min", "f4"),
    ("slice_duration", "f4"),
    ("toffset", "f4"),
    ("glmax", "i4"),
    ("glmin", "i4"),
    ("descrip", "S80"),
    ("aux_file", "S24"),
    ("qform_code", "i2"),
    ("sform_code", "i2"),
    ("quatern_b", "f4"),
    ("quatern_c", "f4"),
    ("quatern_d", "f4"),
    ("qoffset_x", "f4"),
    ("qoffset_y", "f4"),
    ("qoffset_z", "f4"),
    ("srow_x", "f4", (4,)),
    ("srow_y", "f4", (4,)),
    ("srow_z", "f4", (4,)),
    ("intent_name", "S16"),
    ("magic", "S4"),
]
HEADER_DTYPE = np.dtype(_HEADER_DTD)

# NIfTI datatype code <-> numpy dtype, supported subset only
_DT_CODES = {4: np.int16, 512: np.uint16, 16: np.float32, 64: np.float64}
_DT_FROM_NP = {np.dtype(v): k for k, v in _DT_CODES.items()}
_BITPIX = {4: 16, 512: 16, 16: 32, 64: 64}


def _open_for_read(path: Path):
    with open(path, "rb") as fh:
        head = fh.read(2)
    if head == b"\x1f\x8b":
        return gzip.open(path, "rb")
    return open(path, "rb")


def _read_header(raw: bytes) -> np.void:
    if len(raw) < HEADER_SIZE:
        raise FormatError(f"file too short for a NIfTI-1 header ({len(raw)} bytes)")
    hdr = np.frombuffer(raw[:HEADER_SIZE], dtype=HEADER_DTYPE)[0]
    if int(hdr["sizeof_hdr"]) != HEADER_SIZE:
        swapped = np.frombuffer(
            raw[:HEADER_SIZE], dtype=HEADER_DTYPE.newbyteorder()
        )[0]
        if int(swapped["sizeof_hdr"]) != HEADER_SIZE:
            raise FormatError("sizeof_hdr is not 348 in either byte order")
        hdr = swapped
    magic = bytes(hdr["magic"]).ljust(4, b"\x00")  # numpy strips trailing NULs
    if magic != MAGIC_SINGLE:
        raise FormatError(f"bad magic {magic!r}; expected {MAGIC_SINGLE!r}")
    return hdr


def _affine_from_header(hdr: np.void) -> np.ndarray:
    """3x3 direction/scale matrix from sform, else qform, else pixdim diag."""
    if int(hdr["sform_code"]) > 0:
        return np.array(
            [hdr["srow_x"][:3], hdr["srow_y"][:3], hdr["srow_z"][:3]], dtype=np.float64
        )
    if int(hdr["qform_code"]) > 0:
        b, c, d = (float(hdr[k]) for k in ("quatern_b", "quatern_c", "quatern_d"))
        w2 = 1.0 - (b * b + c * c + d * d)
        a = np.sqrt(w2) if w2 > 0 else 0.0
        rot = np.array(
            [
                [a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (b * d + a * c)],
                [2 * (b * c + a * d), a * a + c * c - b * b - d * d, 2 * (c * d - a * b)],
                [2 * (b * d - a * c), 2 * (c * d + a * b), a * a + d * d - b * b - c * c],
            ]
        )
        qfac = -1.0 if float(hdr["pixdim"][0]) == -1.0 else 1.0
        scale = np.array(hdr["pixdim"][1:4], dtype=np.float64)
        scale[2] *= qfac
        return rot @ np.diag(scale)
    return np.diag(np.array(hdr["pixdim"][1:4], dtype=np.float64))


def _canonical_orientation(mat: np.ndarray) -> Tuple[Tuple[int, int, int], Tuple[bool, bool, bool]]:
    """Map voxel axes onto world axes: returns (world axis per voxel axis, flip?)."""
    world_for_voxel = []
    flips = []
    taken = set()
    for j in range(3):
        col = mat[:, j]
        order = np.argsort(-np.abs(col))
        world = next((int(i) for i in order if int(i) not in taken), None)
        if world is None or abs(col[world]) == 0:
            raise FormatError("degenerate orientation matrix")
        taken.add(world)
        world_for_voxel.append(world)
        flips.append(col[world] < 0)
    return tuple(world_for_voxel), tuple(flips)


def load_volume(path: Union[str, Path], kind: Modality) -> ScalarVolume:
    """Load a NIfTI-1 volume, canonicalize orientation, upsample PET to 512.

    Values are cast to real (float32, or float64 for double-precision files).
    PET volumes with in-plane dims != 512 are resampled to 512x512 by
    bilinear interpolation; negative PET values are clipped to zero.
    """
    path = Path(path)
    with _open_for_read(path) as fh:
        raw = fh.read()
    hdr = _read_header(raw)

    code = int(hdr["datatype"])
    if code not in _DT_CODES:
        raise UnsupportedError(f"unsupported NIfTI datatype code {code}")
    ndim = int(hdr["dim"][0])
    if ndim < 3 or any(int(d) != 1 for d in hdr["dim"][4 : ndim + 1]):
        raise UnsupportedError(f"only 3D volumes supported, dim={list(hdr['dim'])}")
    shape = tuple(int(d) for d in hdr["dim"][1:4])
    if any(d < 1 for d in shape):
        raise FormatError(f"non-positive dims {shape}")
    spacing = [float(s) for s in hdr["pixdim"][1:4]]
    if any(s <= 0 for s in spacing):
        raise FormatError(f"non-positive spacing {spacing}")

    dtype = np.dtype(_DT_CODES[code])
    if HEADER_DTYPE != hdr.dtype:  # header came back byte-swapped
        dtype = dtype.newbyteorder()
    offset = int(hdr["vox_offset"])  # extensions, if any, are skipped by seeking
    count = int(np.prod(shape))
    nbytes = count * dtype.itemsize
    if len(raw) < offset + nbytes:
        raise FormatError("file truncated: fewer voxels than the header declares")
    flat = np.frombuffer(raw, dtype=dtype, count=count, offset=offset)
    data = flat.reshape(shape, order="F")

    slope = float(hdr["scl_slope"])
    inter = float(hdr["scl_inter"])
    if data.dtype.kind != "f" or data.dtype.itemsize < 8:
        data = data.astype(np.float32)
    else:
        data = data.astype(np.float64)
    if slope not in (0.0, 1.0) or inter != 0.0:
        scale = slope if slope != 0.0 else 1.0
        data = (data * scale + inter).astype(data.dtype)

    world_axes, flips = _canonical_orientation(_affine_from_header(hdr))
    perm = tuple(np.argsort(world_axes))
    data = np.transpose(data, perm)
    spacing = [spacing[i] for i in perm]
    for axis in range(3):
        if flips[perm[axis]]:
            data = np.flip(data, axis=axis)
    data = np.ascontiguousarray(data)

    if kind is Modality.PET_SUV:
        data = np.clip(data, 0.0, None)
    vol = ScalarVolume(data, tuple(spacing), kind)
    if kind is Modality.PET_SUV and vol.dims[:2] != (IN_PLANE_DIM, IN_PLANE_DIM):
        vol = upsample_in_plane(vol)
    return vol


def save_volume(vol: ScalarVolume, path: Union[str, Path]) -> None:
    """Write a volume as NIfTI-1, gzip-compressed when the path ends in .gz."""
    path = Path(path)
    data = vol.data
    if np.dtype(data.dtype) not in _DT_FROM_NP:
        data = data.astype(np.float32)
    code = _DT_FROM_NP[np.dtype(data.dtype)]

    hdr = np.zeros((), dtype=HEADER_DTYPE)
    hdr["sizeof_hdr"] = HEADER_SIZE
    hdr["dim"] = [3, *vol.dims, 1, 1, 1, 1]
    hdr["datatype"] = code
    hdr["bitpix"] = _BITPIX[code]
    hdr["pixdim"] = [1.0, *vol.spacing, 0.0, 0.0, 0.0, 0.0]
    hdr["vox_offset"] = HEADER_SIZE + 4
    hdr["scl_slope"] = 1.0
    hdr["scl_inter"] = 0.0
    hdr["xyzt_units"] = 2 | 8  # mm, seconds
    hdr["sform_code"] = 1
    hdr["qform_code"] = 0
    hdr["srow_x"] = [vol.spacing[0], 0.0, 0.0, 0.0]
    hdr["srow_y"] = [0.0, vol.spacing[1], 0.0, 0.0]
    hdr["srow_z"] = [0.0, 0.0, vol.spacing[2], 0.0]
    hdr["descrip"] = vol.modality_kind.value.encode()
    hdr["magic"] = MAGIC_SINGLE

    payload = hdr.tobytes() + b"\x00\x00\x00\x00" + np.asfortranarray(data).tobytes(order="F")
    opener = gzip.open if path.suffix == ".gz" else open
    try:
        with opener(path, "wb") as fh:
            fh.write(payload)
    except OSError as exc:
        raise OSError(f"cannot write volume to {path}: {exc}") from exc
