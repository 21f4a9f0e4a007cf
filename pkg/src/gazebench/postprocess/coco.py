"""COCO-style dataset export: per-split JSON index plus temporal gaze CSVs.

Three levels of detail in the JSON: study reads (observer + raw file links),
lesions (object level), and slice boxes. The companion CSV holds the
temporal gaze rows in 512-px image space; boxes are attached to the rows
recorded during the select..accept span of the lesion they produced.
"""

from __future__ import annotations

import csv
import hashlib
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple, Union

from gazebench.errors import ExportError
from gazebench.proposal.engine import ProposalPolicy
from gazebench.session.mapping import map_gaze_to_image
from gazebench.session.model import SessionRecording, ViewModality
from gazebench.session.replay import run_events
from gazebench.volume.core import ScalarVolume

AXIAL_MODALITIES = (ViewModality.PET, ViewModality.CT, ViewModality.FUSED)
SPLITS = ("train", "val", "test")
CSV_COLUMNS = (
    "study_id",
    "read_id",
    "slice_number",
    "system_time_stamp",
    "x",
    "y",
    "lesion_uid",
    "bbox_x",
    "bbox_y",
    "bbox_w",
    "bbox_h",
)


@dataclass
class StudyRead:
    study_path: str
    observer_id: str
    reader_role: str  # trainee | experienced
    recording: SessionRecording

    @property
    def read_id(self) -> str:
        return f"{self.observer_id}:{self.study_path}"


def split_studies(
    study_paths: List[str], seed: int
) -> Dict[str, List[str]]:
    """Deterministic 80/10/10 partition of studies by seeded shuffle."""
    studies = sorted(set(study_paths))
    rng = random.Random(seed)
    rng.shuffle(studies)
    n = len(studies)
    n_train = round(0.8 * n)
    n_val = round(0.1 * n)
    return {
        "train": sorted(studies[:n_train]),
        "val": sorted(studies[n_train : n_train + n_val]),
        "test": sorted(studies[n_train + n_val :]),
    }


def export_coco(
    reads: List[StudyRead],
    out_dir: Union[str, Path],
    split_seed: int,
    pet_resolver: Callable[[str], Optional[ScalarVolume]],
    policy: ProposalPolicy = ProposalPolicy(),
) -> List[Path]:
    """Write coco_style_info_{split}.json and gaze_data_{split}.csv files."""
    missing = sorted(
        {r.study_path for r in reads if pet_resolver(r.study_path) is None}
    )
    if missing:
        raise ExportError(
            f"cannot export: {len(missing)} study volume(s) unresolvable", paths=missing
        )

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    assignment = split_studies([r.study_path for r in reads], split_seed)
    split_of = {s: name for name, studies in assignment.items() for s in studies}

    reads_by_split: Dict[str, List[StudyRead]] = {name: [] for name in SPLITS}
    for read in sorted(reads, key=lambda r: r.read_id):
        reads_by_split[split_of[read.study_path]].append(read)

    paths = []
    for split in SPLITS:
        doc, rows = _build_split(reads_by_split[split], assignment[split], pet_resolver, policy)
        doc["split"] = split
        doc["split_seed"] = split_seed
        json_path = out_dir / f"coco_style_info_{split}.json"
        json_path.write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n")
        csv_path = out_dir / f"gaze_data_{split}.csv"
        with open(csv_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            writer.writerows(rows)
        paths.extend([json_path, csv_path])
    return paths


def _build_split(
    reads: List[StudyRead],
    studies: List[str],
    pet_resolver: Callable[[str], Optional[ScalarVolume]],
    policy: ProposalPolicy,
) -> Tuple[dict, List[list]]:
    study_records = []
    lesion_records = []
    slice_records = []
    rows: List[list] = []

    reads_by_study: Dict[str, List[StudyRead]] = {}
    for read in reads:
        reads_by_study.setdefault(read.study_path, []).append(read)

    for study_path in studies:
        study_id = study_path
        study_reads = []
        for read in reads_by_study.get(study_path, []):
            study_reads.append(
                {
                    "read_id": read.read_id,
                    "observer_id": read.observer_id,
                    "reader_role": read.reader_role,
                    "gaze_files": {
                        "gazedots": f"gaze_data/{read.observer_id}/{study_path}/gazedots_tobii.json",
                        "lesions": f"gaze_data/{read.observer_id}/{study_path}/gaze_lesions.json",
                        "key_presses": f"gaze_data/{read.observer_id}/{study_path}/key_press_events.json",
                    },
                }
            )
            pet = pet_resolver(study_path)
            lesion_rows, slice_rows, gaze_rows = _read_records(read, study_id, pet, policy)
            lesion_records.extend(lesion_rows)
            slice_records.extend(slice_rows)
            rows.extend(gaze_rows)
        study_records.append(
            {"study_id": study_id, "study_path": study_path, "reads": study_reads}
        )

    doc = {
        "studies": study_records,
        "lesions": lesion_records,
        "slices": slice_records,
    }
    return doc, rows


def _read_records(
    read: StudyRead, study_id: str, pet: ScalarVolume, policy: ProposalPolicy
) -> Tuple[List[dict], List[dict], List[list]]:
    recording = read.recording
    lesion_records = []
    slice_records = []

    for lesion in recording.lesions:
        lesion_uid = f"{read.read_id}#lesion_{lesion.lesion_id}"
        lesion_records.append(
            {
                "lesion_uid": lesion_uid,
                "read_id": read.read_id,
                "study_id": study_id,
                "lesion_id": lesion.lesion_id,
                "certainty": lesion.certainty.value,
                "threshold": lesion.suv_threshold,
                "root_slice": lesion.root_slice,
                "n_slices": len(lesion.slice_boxes),
            }
        )
        for slice_number in sorted(lesion.slice_boxes):
            sb = lesion.slice_boxes[slice_number]
            slice_records.append(
                {
                    "slice_uid": f"{lesion_uid}@{slice_number}",
                    "lesion_uid": lesion_uid,
                    "slice_number": slice_number,
                    "bbox": [sb.box.x, sb.box.y, sb.box.w, sb.box.h],
                    "status": sb.status.value,
                    "threshold": sb.suv_threshold,
                }
            )

    # accepted select..accept spans attach box columns to their gaze rows
    spans = []
    episodes = run_events(recording, pet, policy).episodes
    for ep in episodes:
        if ep.outcome == "accepted" and ep.lesion_id is not None:
            lesion = next(
                (l for l in recording.lesions if l.lesion_id == ep.lesion_id), None
            )
            if lesion is not None:
                spans.append((ep.select_time_us, ep.close_time_us, lesion))

    rows = []
    for gaze, display in zip(recording.tobii_cam, recording.common_cam):
        if display.modality not in AXIAL_MODALITIES:
            continue
        point = map_gaze_to_image(gaze, display)
        if point is None:
            continue
        ts = gaze.system_time_stamp
        lesion_uid = ""
        bbox = ["", "", "", ""]
        for start, end, lesion in spans:
            if start <= ts <= end:
                sb = lesion.slice_boxes.get(display.slice_number)
                lesion_uid = f"{read.read_id}#lesion_{lesion.lesion_id}"
                if sb is not None:
                    bbox = [sb.box.x, sb.box.y, sb.box.w, sb.box.h]
                break
        rows.append(
            [
                study_id,
                read.read_id,
                display.slice_number,
                ts,
                point[0],
                point[1],
                lesion_uid,
                *bbox,
            ]
        )
    return lesion_records, slice_records, rows


def validate_export(out_dir: Union[str, Path]) -> List[str]:
    """Referential-integrity check over all splits; returns found problems."""
    out_dir = Path(out_dir)
    problems: List[str] = []
    all_studies: Dict[str, str] = {}
    for split in SPLITS:
        json_path = out_dir / f"coco_style_info_{split}.json"
        csv_path = out_dir / f"gaze_data_{split}.csv"
        if not json_path.exists() or not csv_path.exists():
            problems.append(f"{split}: missing export file")
            continue
        doc = json.loads(json_path.read_text())
        study_ids = {s["study_id"] for s in doc["studies"]}
        read_ids = {
            r["read_id"] for s in doc["studies"] for r in s["reads"]
        }
        for study_id in study_ids:
            if study_id in all_studies:
                problems.append(
                    f"study {study_id} in both {all_studies[study_id]} and {split}"
                )
            all_studies[study_id] = split
        lesion_uids = set()
        for lesion in doc["lesions"]:
            lesion_uids.add(lesion["lesion_uid"])
            if lesion["study_id"] not in study_ids:
                problems.append(f"{split}: lesion {lesion['lesion_uid']} has unknown study")
            if lesion["read_id"] not in read_ids:
                problems.append(f"{split}: lesion {lesion['lesion_uid']} has unknown read")
        slice_counts: Dict[str, int] = {uid: 0 for uid in lesion_uids}
        for entry in doc["slices"]:
            if entry["lesion_uid"] not in lesion_uids:
                problems.append(f"{split}: slice {entry['slice_uid']} has unknown lesion")
            else:
                slice_counts[entry["lesion_uid"]] += 1
        for uid, count in slice_counts.items():
            if count < 1:
                problems.append(f"{split}: lesion {uid} has no slice records")
        with open(csv_path, newline="") as fh:
            reader = csv.DictReader(fh)
            for row in reader:
                if row["study_id"] not in study_ids:
                    problems.append(f"{split}: csv row references unknown study {row['study_id']}")
                    break
                if row["lesion_uid"] and row["lesion_uid"] not in lesion_uids:
                    problems.append(f"{split}: csv row references unknown lesion {row['lesion_uid']}")
                    break
    return problems


def export_checksums(out_dir: Union[str, Path]) -> Dict[str, str]:
    out_dir = Path(out_dir)
    sums = {}
    for split in SPLITS:
        for name in (f"coco_style_info_{split}.json", f"gaze_data_{split}.csv"):
            path = out_dir / name
            if path.exists():
                sums[name] = hashlib.sha256(path.read_bytes()).hexdigest()
    return sums
