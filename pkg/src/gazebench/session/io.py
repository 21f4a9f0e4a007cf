"""Emission and parsing of the three per-read session JSON files.

File names and field names follow the published recording layout:
gazedots_tobii.json (synced gaze + display state + pauses),
gaze_lesions.json (lesion annotations with display-pixel boxes),
key_press_events.json (timestamped integer key codes).

Serialization is canonical: fixed key order, shortest round-trip decimal
floats (Python repr), two-space indent, trailing newline. Unknown fields
survive a parse/emit round trip.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from gazebench.proposal.model import Bbox, Certainty, LesionAnnotation, SliceBox, SliceStatus
from gazebench.session.keys import KEY_ACTIONS, apply_remap
from gazebench.session.model import (
    DisplaySample,
    EyeSample,
    GazeSample,
    KeyEvent,
    SessionHeader,
    SessionRecording,
    ViewModality,
)
from gazebench.volume.core import IN_PLANE_DIM

GAZEDOTS_FILE = "gazedots_tobii.json"
LESIONS_FILE = "gaze_lesions.json"
KEYS_FILE = "key_press_events.json"
SESSION_FILES = (GAZEDOTS_FILE, LESIONS_FILE, KEYS_FILE)
METADATA_FILE = "metadata.csv"


def _dumps(doc) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False, allow_nan=True) + "\n"


def _floats(values) -> list:
    return [float(v) for v in values]


# -- tracker samples ---------------------------------------------------------

_EYE_FIELDS = (
    "gaze_point_on_display_area",
    "gaze_point_in_user_coordinate_system",
    "gaze_point_validity",
    "pupil_diameter",
    "pupil_validity",
    "gaze_origin_in_user_coordinate_system",
    "gaze_origin_in_trackbox_coordinate_system",
)


def _eye_to_dict(prefix: str, eye: EyeSample, out: dict) -> None:
    out[f"{prefix}_gaze_point_on_display_area"] = _floats(eye.gaze_point_on_display_area)
    out[f"{prefix}_gaze_point_in_user_coordinate_system"] = _floats(
        eye.gaze_point_in_user_coordinate_system
    )
    out[f"{prefix}_gaze_point_validity"] = int(eye.gaze_point_validity)
    out[f"{prefix}_pupil_diameter"] = float(eye.pupil_diameter)
    out[f"{prefix}_pupil_validity"] = int(eye.pupil_validity)
    out[f"{prefix}_gaze_origin_in_user_coordinate_system"] = _floats(
        eye.gaze_origin_in_user_coordinate_system
    )
    out[f"{prefix}_gaze_origin_in_trackbox_coordinate_system"] = _floats(
        eye.gaze_origin_in_trackbox_coordinate_system
    )


def _eye_from_dict(prefix: str, doc: dict) -> EyeSample:
    return EyeSample(
        gaze_point_on_display_area=tuple(doc[f"{prefix}_gaze_point_on_display_area"]),
        gaze_point_in_user_coordinate_system=tuple(
            doc[f"{prefix}_gaze_point_in_user_coordinate_system"]
        ),
        gaze_point_validity=int(doc[f"{prefix}_gaze_point_validity"]),
        pupil_diameter=float(doc[f"{prefix}_pupil_diameter"]),
        pupil_validity=int(doc[f"{prefix}_pupil_validity"]),
        gaze_origin_in_user_coordinate_system=tuple(
            doc[f"{prefix}_gaze_origin_in_user_coordinate_system"]
        ),
        gaze_origin_in_trackbox_coordinate_system=tuple(
            doc[f"{prefix}_gaze_origin_in_trackbox_coordinate_system"]
        ),
    )


_TRACKER_KEYS = (
    ("device_time_stamp", "system_time_stamp")
    + tuple(f"left_{f}" for f in _EYE_FIELDS)
    + tuple(f"right_{f}" for f in _EYE_FIELDS)
)


def tracker_sample_to_dict(sample: GazeSample) -> dict:
    out = {
        "device_time_stamp": int(sample.device_time_stamp),
        "system_time_stamp": int(sample.system_time_stamp),
    }
    _eye_to_dict("left", sample.left, out)
    _eye_to_dict("right", sample.right, out)
    out.update(dict(sample.extra))
    return out


def tracker_sample_from_dict(doc: dict) -> GazeSample:
    extra = tuple((k, v) for k, v in doc.items() if k not in _TRACKER_KEYS)
    return GazeSample(
        device_time_stamp=int(doc["device_time_stamp"]),
        system_time_stamp=int(doc["system_time_stamp"]),
        left=_eye_from_dict("left", doc),
        right=_eye_from_dict("right", doc),
        extra=extra,
    )


# -- display samples ---------------------------------------------------------

_DISPLAY_KEYS = (
    "slice_number",
    "modality",
    "norm_min",
    "norm_max",
    "window_x",
    "window_y",
    "window_width",
    "window_height",
    "monitor_width",
    "monitor_height",
    "ct_window",
)


def display_sample_to_dict(sample: DisplaySample) -> dict:
    out = {
        "slice_number": int(sample.slice_number),
        "modality": sample.modality.value,
        "norm_min": float(sample.norm_min),
        "norm_max": float(sample.norm_max),
        "window_x": int(sample.window_x),
        "window_y": int(sample.window_y),
        "window_width": int(sample.window_width),
        "window_height": int(sample.window_height),
        "monitor_width": int(sample.monitor_width),
        "monitor_height": int(sample.monitor_height),
        "ct_window": int(sample.ct_window),
    }
    out.update(dict(sample.extra))
    return out


def display_sample_from_dict(doc: dict) -> DisplaySample:
    extra = tuple((k, v) for k, v in doc.items() if k not in _DISPLAY_KEYS)
    return DisplaySample(
        slice_number=int(doc["slice_number"]),
        modality=ViewModality(doc["modality"]),
        norm_min=float(doc["norm_min"]),
        norm_max=float(doc["norm_max"]),
        window_x=int(doc["window_x"]),
        window_y=int(doc["window_y"]),
        window_width=int(doc["window_width"]),
        window_height=int(doc["window_height"]),
        monitor_width=int(doc["monitor_width"]),
        monitor_height=int(doc["monitor_height"]),
        ct_window=int(doc["ct_window"]),
        extra=extra,
    )


# -- lesions ------------------------------------------------------------------

def _box_to_display(box: Bbox, display: DisplaySample) -> list:
    sx = display.window_width / IN_PLANE_DIM
    sy = display.window_height / IN_PLANE_DIM
    return [box.x * sx, box.y * sy, box.w * sx, box.h * sy]


def _box_from_display(xywh, display: DisplaySample) -> Bbox:
    sx = display.window_width / IN_PLANE_DIM
    sy = display.window_height / IN_PLANE_DIM
    return Bbox(
        x=int(round(xywh[0] / sx)),
        y=int(round(xywh[1] / sy)),
        w=max(1, int(round(xywh[2] / sx))),
        h=max(1, int(round(xywh[3] / sy))),
    )


_LESION_KEYS = (
    "lesion_id",
    "certainty",
    "threshold",
    "root_slice",
    "select_gaze",
    "select_time_stamp",
    "display_sample",
    "slices",
)


def lesion_to_dict(lesion: LesionAnnotation, display: DisplaySample) -> dict:
    slices = []
    for slice_number in sorted(lesion.slice_boxes):
        sb = lesion.slice_boxes[slice_number]
        slices.append(
            {
                "slice_number": int(slice_number),
                "bbox": _box_to_display(sb.box, display),
                "status": sb.status.value,
                "threshold": float(sb.suv_threshold),
            }
        )
    return {
        "lesion_id": int(lesion.lesion_id),
        "certainty": lesion.certainty.value,
        "threshold": float(lesion.suv_threshold),
        "root_slice": int(lesion.root_slice),
        "select_gaze": _floats(lesion.select_gaze),
        "select_time_stamp": int(lesion.select_time_us),
        "display_sample": display_sample_to_dict(display),
        "slices": slices,
    }


def lesion_from_dict(doc: dict) -> Tuple[LesionAnnotation, DisplaySample, tuple]:
    display = display_sample_from_dict(doc["display_sample"])
    slice_boxes = {}
    for entry in doc["slices"]:
        slice_boxes[int(entry["slice_number"])] = SliceBox(
            box=_box_from_display(entry["bbox"], display),
            status=SliceStatus(entry["status"]),
            suv_threshold=float(entry["threshold"]),
        )
    lesion = LesionAnnotation(
        lesion_id=int(doc["lesion_id"]),
        certainty=Certainty(doc["certainty"]),
        root_slice=int(doc["root_slice"]),
        suv_threshold=float(doc["threshold"]),
        slice_boxes=slice_boxes,
        select_gaze=tuple(doc["select_gaze"]),
        select_time_us=int(doc.get("select_time_stamp", 0)),
    )
    extra = tuple((k, v) for k, v in doc.items() if k not in _LESION_KEYS)
    return lesion, display, extra


# -- whole-session emit / parse ------------------------------------------------

_GAZEDOTS_KEYS = (
    "tobii_cam",
    "common_cam",
    "pauses",
    "monitor_width",
    "monitor_height",
    "display_window_dim",
    "case_difficulty",
    "ui_experience",
    "comment",
)
_KEYDOC_KEYS = ("key_code_table", "key_press_events")
_LESIONDOC_KEYS = ("lesions",)


def emit_session(recording: SessionRecording, out_dir: Union[str, Path]) -> List[Path]:
    """Write the three JSON files for one study read; returns their paths.

    Lesion boxes are emitted in display-pixel coordinates scaled by each
    lesion's select-time display sample (falling back to the last display
    sample, then to the header window size).
    """
    recording.validate()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    header = recording.header

    gazedots = {
        "tobii_cam": [tracker_sample_to_dict(s) for s in recording.tobii_cam],
        "common_cam": [display_sample_to_dict(s) for s in recording.common_cam],
        "pauses": [bool(p) for p in recording.pauses],
        "monitor_width": int(header.monitor_width),
        "monitor_height": int(header.monitor_height),
        "display_window_dim": [int(d) for d in header.display_window_dim],
        "case_difficulty": int(header.case_difficulty),
        "ui_experience": int(header.ui_experience),
        "comment": header.comment,
    }
    gazedots.update(recording.extra.get("gazedots", {}))

    lesions = []
    for lesion in recording.lesions:
        display = recording.lesion_displays.get(lesion.lesion_id)
        if display is None:
            display = _fallback_display(recording)
        doc = lesion_to_dict(lesion, display)
        doc.update(dict(recording.lesion_extras.get(lesion.lesion_id, ())))
        lesions.append(doc)
    lesions_doc = {"lesions": lesions}
    lesions_doc.update(recording.extra.get("lesions", {}))

    keys_doc = {
        "key_code_table": dict(KEY_ACTIONS),
        "key_press_events": [
            {"system_time_stamp": int(e.system_time_stamp), "key_code": int(e.key_code),
             **dict(e.extra)}
            for e in recording.key_events
        ],
    }
    keys_doc.update(recording.extra.get("keys", {}))

    paths = []
    for name, doc in (
        (GAZEDOTS_FILE, gazedots),
        (LESIONS_FILE, lesions_doc),
        (KEYS_FILE, keys_doc),
    ):
        path = out_dir / name
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(_dumps(doc), encoding="utf-8")
        tmp.replace(path)
        paths.append(path)
    return paths


def _fallback_display(recording: SessionRecording) -> DisplaySample:
    if recording.common_cam:
        return recording.common_cam[-1]
    header = recording.header
    return DisplaySample(
        slice_number=0,
        modality=ViewModality.PET,
        norm_min=0.0,
        norm_max=10.0,
        window_x=0,
        window_y=0,
        window_width=header.display_window_dim[0],
        window_height=header.display_window_dim[1],
        monitor_width=header.monitor_width,
        monitor_height=header.monitor_height,
        ct_window=1,
    )


def parse_session(
    session_dir: Union[str, Path], key_remap: Optional[Dict[int, int]] = None
) -> SessionRecording:
    """Lossless inverse of emit_session; unknown fields are kept opaquely."""
    session_dir = Path(session_dir)
    docs = {}
    for name in SESSION_FILES:
        path = session_dir / name
        if not path.exists():
            raise FileNotFoundError(f"missing session file: {path}")
        docs[name] = json.loads(path.read_text(encoding="utf-8"))

    gd = docs[GAZEDOTS_FILE]
    header = SessionHeader(
        monitor_width=int(gd["monitor_width"]),
        monitor_height=int(gd["monitor_height"]),
        display_window_dim=tuple(int(d) for d in gd["display_window_dim"]),
        case_difficulty=int(gd["case_difficulty"]),
        ui_experience=int(gd["ui_experience"]),
        comment=gd["comment"],
    )
    recording = SessionRecording(header=header)
    recording.tobii_cam = [tracker_sample_from_dict(s) for s in gd["tobii_cam"]]
    recording.common_cam = [display_sample_from_dict(s) for s in gd["common_cam"]]
    recording.pauses = [bool(p) for p in gd["pauses"]]
    recording.extra["gazedots"] = {
        k: v for k, v in gd.items() if k not in _GAZEDOTS_KEYS
    }

    ld = docs[LESIONS_FILE]
    for doc in ld["lesions"]:
        lesion, display, extra = lesion_from_dict(doc)
        recording.lesions.append(lesion)
        recording.lesion_displays[lesion.lesion_id] = display
        if extra:
            recording.lesion_extras[lesion.lesion_id] = extra
    recording.extra["lesions"] = {k: v for k, v in ld.items() if k not in _LESIONDOC_KEYS}

    kd = docs[KEYS_FILE]
    for entry in kd["key_press_events"]:
        extra = tuple(
            (k, v) for k, v in entry.items() if k not in ("system_time_stamp", "key_code")
        )
        recording.key_events.append(
            KeyEvent(
                system_time_stamp=int(entry["system_time_stamp"]),
                key_code=apply_remap(int(entry["key_code"]), key_remap),
                extra=extra,
            )
        )
    recording.extra["keys"] = {k: v for k, v in kd.items() if k not in _KEYDOC_KEYS}

    recording.validate()
    return recording


# -- dataset layout ------------------------------------------------------------

def session_dir_for(root: Union[str, Path], observer_id: str, study_path: str) -> Path:
    return Path(root) / "gaze_data" / observer_id / study_path


def append_metadata(root: Union[str, Path], observer_id: str, study_path: str) -> Path:
    """Add one (observer, study) row to the dataset root's metadata.csv."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    path = root / METADATA_FILE
    new = not path.exists()
    with open(path, "a", newline="") as fh:
        writer = csv.writer(fh)
        if new:
            writer.writerow(["observer_id", "study_path"])
        writer.writerow([observer_id, study_path])
    return path
