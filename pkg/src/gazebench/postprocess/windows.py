"""Trajectory windows around selection and accept events.

Selection windows: up to the last 16 valid gaze samples strictly before a
select keystroke on the select-time slice view, filtered at a 100-px mean
distance to the decided box center.

Intent windows: 60..120-sample continuous gaze runs ending at each accept
(intentional) and, mirrored from random non-tumor hot spots, unintentional
runs sampled under the configuration below.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from gazebench.proposal.components import threshold_components
from gazebench.proposal.engine import ProposalPolicy
from gazebench.proposal.model import Bbox
from gazebench.session.mapping import map_gaze_to_image
from gazebench.session.model import SessionRecording, ViewModality
from gazebench.session.replay import run_events
from gazebench.volume.core import ScalarVolume

AXIAL_MODALITIES = (ViewModality.PET, ViewModality.CT, ViewModality.FUSED)

SELECTION_WINDOW_LEN = 16
SELECTION_FILTER_PX = 100.0
INTENT_MIN_SAMPLES = 60
INTENT_MAX_SAMPLES = 120
MAX_VALIDITY_GAP_TICKS = 1


@dataclass(frozen=True)
class TrajectorySample:
    timestamp_us: int
    image_xy: Tuple[float, float]
    slice_number: int
    modality: ViewModality


@dataclass
class TrajectoryWindow:
    lesion_id: Optional[int]
    samples: List[TrajectorySample]
    window_kind: str  # selection16 | intent1to2s
    label: str  # accepted | rejected | intentional | unintentional
    target_box: Optional[Bbox] = None


@dataclass
class WindowReport:
    emitted: int = 0
    dropped_empty: int = 0
    dropped_far: int = 0
    dropped_short: int = 0


@dataclass(frozen=True)
class HotSpotConfig:
    """Knobs for the unintentional-sample mirror of intent windows."""

    suv_floor: float = 2.5
    dilation_px: int = 2
    gaze_radius_px: float = 100.0
    seed: int = 0
    max_attempts_per_window: int = 50


def _tick_stream(recording: SessionRecording) -> List[Optional[TrajectorySample]]:
    """Per-tick mapped samples; None where gaze is invalid or off-window."""
    out: List[Optional[TrajectorySample]] = []
    for gaze, display in zip(recording.tobii_cam, recording.common_cam):
        point = map_gaze_to_image(gaze, display)
        if point is None:
            out.append(None)
        else:
            out.append(
                TrajectorySample(
                    timestamp_us=gaze.system_time_stamp,
                    image_xy=point,
                    slice_number=display.slice_number,
                    modality=display.modality,
                )
            )
    return out


def extract_selection_windows(
    recording: SessionRecording,
    pet: ScalarVolume,
    policy: ProposalPolicy = ProposalPolicy(),
) -> Tuple[List[TrajectoryWindow], WindowReport]:
    """One window per select..accept/reject episode, accepted and rejected alike.

    The PET volume is needed to re-derive rejected candidates' boxes; episode
    geometry comes from an event replay of the recording.
    """
    episodes = run_events(recording, pet, policy).episodes
    stream = _tick_stream(recording)
    ticks = recording.tobii_cam
    report = WindowReport()
    windows: List[TrajectoryWindow] = []
    for ep in episodes:
        if ep.outcome not in ("accepted", "rejected") or ep.final_box is None:
            continue
        samples = []
        for i in range(len(ticks) - 1, -1, -1):
            if ticks[i].system_time_stamp >= ep.select_time_us:
                continue
            sample = stream[i]
            if sample is None:
                continue
            if sample.slice_number != ep.slice_number:
                continue
            if sample.modality not in AXIAL_MODALITIES:
                continue
            samples.append(sample)
            if len(samples) == SELECTION_WINDOW_LEN:
                break
        samples.reverse()
        if not samples:
            report.dropped_empty += 1
            continue
        cx, cy = ep.final_box.center
        mean_dist = float(
            np.mean([math.hypot(s.image_xy[0] - cx, s.image_xy[1] - cy) for s in samples])
        )
        if mean_dist > SELECTION_FILTER_PX:
            report.dropped_far += 1
            continue
        windows.append(
            TrajectoryWindow(
                lesion_id=ep.lesion_id,
                samples=samples,
                window_kind="selection16",
                label=ep.outcome,
                target_box=ep.final_box,
            )
        )
        report.emitted += 1
    return windows, report


def _continuous_window_ending_at(
    stream: List[Optional[TrajectorySample]], end_index: int
) -> List[TrajectorySample]:
    """Longest valid-sample suffix ending at end_index with gaps <= 1 tick."""
    samples: List[TrajectorySample] = []
    gap = 0
    i = end_index
    taken_ticks = 0
    while i >= 0 and taken_ticks < INTENT_MAX_SAMPLES:
        sample = stream[i]
        if sample is None:
            gap += 1
            if gap > MAX_VALIDITY_GAP_TICKS:
                break
        else:
            gap = 0
            samples.append(sample)
        taken_ticks += 1
        i -= 1
    samples.reverse()
    return samples


def extract_intent_windows(
    recording: SessionRecording,
    pet: ScalarVolume,
    policy: ProposalPolicy = ProposalPolicy(),
    hotspots: HotSpotConfig = HotSpotConfig(),
) -> Tuple[List[TrajectoryWindow], WindowReport]:
    """Intentional windows before accepts, plus matched unintentional ones."""
    episodes = run_events(recording, pet, policy).episodes
    stream = _tick_stream(recording)
    ticks = recording.tobii_cam
    report = WindowReport()
    windows: List[TrajectoryWindow] = []

    for ep in episodes:
        if ep.outcome != "accepted":
            continue
        end = -1
        for i in range(len(ticks) - 1, -1, -1):
            if ticks[i].system_time_stamp < ep.close_time_us:
                end = i
                break
        if end < 0:
            report.dropped_empty += 1
            continue
        samples = _continuous_window_ending_at(stream, end)
        if len(samples) < INTENT_MIN_SAMPLES:
            report.dropped_short += 1
            continue
        windows.append(
            TrajectoryWindow(
                lesion_id=ep.lesion_id,
                samples=samples,
                window_kind="intent1to2s",
                label="intentional",
                target_box=ep.final_box,
            )
        )
        report.emitted += 1

    n_target = len(windows)
    windows.extend(
        _unintentional_windows(recording, pet, stream, n_target, hotspots, report)
    )
    return windows, report


def find_hotspots(
    recording: SessionRecording, pet: ScalarVolume, config: HotSpotConfig
) -> List[Tuple[int, Bbox]]:
    """Non-annotated hot components: SUV >= floor, dilated box clear of lesions."""
    annotated = {}
    for lesion in recording.lesions:
        for s, sb in lesion.slice_boxes.items():
            annotated.setdefault(s, []).append(sb.box)
    spots: List[Tuple[int, Bbox]] = []
    for z in range(pet.nz):
        comps = threshold_components(pet.slice_data(z), config.suv_floor, z)
        for comp in comps:
            b = comp.box
            d = config.dilation_px
            dilated = Bbox(
                x=max(0, b.x - d),
                y=max(0, b.y - d),
                w=b.w + 2 * d,
                h=b.h + 2 * d,
            )
            if all(dilated.iou(a) == 0.0 for a in annotated.get(z, [])):
                spots.append((z, b))
    return spots


def _unintentional_windows(
    recording: SessionRecording,
    pet: ScalarVolume,
    stream: List[Optional[TrajectorySample]],
    n_target: int,
    config: HotSpotConfig,
    report: WindowReport,
) -> List[TrajectoryWindow]:
    if n_target == 0:
        return []
    spots = find_hotspots(recording, pet, config)
    if not spots:
        return []
    rng = random.Random(config.seed)
    out: List[TrajectoryWindow] = []
    attempts = 0
    used: set = set()
    max_attempts = config.max_attempts_per_window * n_target
    while len(out) < n_target and attempts < max_attempts:
        attempts += 1
        z, box = spots[rng.randrange(len(spots))]
        eligible = [
            i
            for i, sample in enumerate(stream)
            if sample is not None
            and sample.slice_number == z
            and sample.modality in AXIAL_MODALITIES
            and box.distance_to(*sample.image_xy) <= config.gaze_radius_px
        ]
        if not eligible:
            continue
        end = eligible[rng.randrange(len(eligible))]
        key = (z, box.x, box.y, end)
        if key in used:
            continue
        samples = _continuous_window_ending_at(stream, end)
        if len(samples) < INTENT_MIN_SAMPLES:
            continue
        used.add(key)
        out.append(
            TrajectoryWindow(
                lesion_id=None,
                samples=samples,
                window_kind="intent1to2s",
                label="unintentional",
                target_box=box,
            )
        )
        report.emitted += 1
    return out
