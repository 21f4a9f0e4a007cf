"""Deterministic replay of a recording against the proposal engine."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

from gazebench.errors import ReplayMismatchError
from gazebench.proposal.engine import AnnotationEngine, ConfirmationEpisode, ProposalPolicy
from gazebench.proposal.model import LesionAnnotation
from gazebench.session.driver import ANNOTATION_ACTIONS, KeyContext, apply_annotation_key
from gazebench.session.keys import ACTION_FOR_CODE
from gazebench.session.mapping import map_gaze_to_image, monitor_point
from gazebench.session.model import SessionRecording
from gazebench.volume.core import ScalarVolume


@dataclass
class ReplayResult:
    engine: AnnotationEngine
    warnings: List[str]

    @property
    def lesions(self) -> List[LesionAnnotation]:
        return self.engine.state.accepted

    @property
    def episodes(self) -> List[ConfirmationEpisode]:
        return self.engine.episodes


def run_events(
    recording: SessionRecording,
    pet: ScalarVolume,
    policy: ProposalPolicy = ProposalPolicy(),
) -> ReplayResult:
    """Feed synced gaze and key events through a fresh engine in time order.

    Ticks and keys are merged by system timestamp; at equal timestamps the
    tick is applied first so the key sees that tick's display state.
    """
    engine = AnnotationEngine(pet, policy)
    warnings: List[str] = []
    ctx: Optional[KeyContext] = None

    ticks = recording.tobii_cam
    displays = recording.common_cam
    keys = recording.key_events
    ti = ki = 0
    while ti < len(ticks) or ki < len(keys):
        take_tick = ti < len(ticks) and (
            ki >= len(keys)
            or ticks[ti].system_time_stamp <= keys[ki].system_time_stamp
        )
        if take_tick:
            gaze, display = ticks[ti], displays[ti]
            gaze_image = map_gaze_to_image(gaze, display)
            if gaze_image is not None:
                ctx = KeyContext(
                    display=display,
                    gaze_image=gaze_image,
                    gaze_display=monitor_point(gaze, display),
                    timestamp_us=gaze.system_time_stamp,
                )
            else:
                ctx = KeyContext(
                    display=display,
                    gaze_image=ctx.gaze_image if ctx else None,
                    gaze_display=ctx.gaze_display if ctx else None,
                    timestamp_us=gaze.system_time_stamp,
                )
            ti += 1
            continue
        event = keys[ki]
        ki += 1
        action = ACTION_FOR_CODE.get(event.key_code)
        if action is None or action not in ANNOTATION_ACTIONS:
            continue
        key_ctx = None
        if ctx is not None:
            key_ctx = KeyContext(
                ctx.display, ctx.gaze_image, ctx.gaze_display, event.system_time_stamp
            )
        warning = apply_annotation_key(engine, action, key_ctx)
        if warning:
            warnings.append(warning)
    return ReplayResult(engine=engine, warnings=warnings)


def _first_difference(a: LesionAnnotation, b: LesionAnnotation) -> Optional[str]:
    if a.lesion_id != b.lesion_id:
        return f"lesion id {a.lesion_id} != {b.lesion_id}"
    if a.certainty is not b.certainty:
        return f"certainty {a.certainty.value} != {b.certainty.value}"
    if a.root_slice != b.root_slice:
        return f"root slice {a.root_slice} != {b.root_slice}"
    if a.suv_threshold != b.suv_threshold:
        return f"threshold {a.suv_threshold} != {b.suv_threshold}"
    if sorted(a.slice_boxes) != sorted(b.slice_boxes):
        return f"slice set {sorted(a.slice_boxes)} != {sorted(b.slice_boxes)}"
    for s in sorted(a.slice_boxes):
        if a.slice_boxes[s] != b.slice_boxes[s]:
            return f"slice {s}: {a.slice_boxes[s]} != {b.slice_boxes[s]}"
    if tuple(a.select_gaze) != tuple(b.select_gaze):
        return f"select gaze {a.select_gaze} != {b.select_gaze}"
    if a.select_time_us != b.select_time_us:
        return f"select time {a.select_time_us} != {b.select_time_us}"
    return None


def replay(
    recording: SessionRecording,
    pet: ScalarVolume,
    policy: ProposalPolicy = ProposalPolicy(),
) -> ReplayResult:
    """Replay a recording and verify it reproduces the stored lesion set."""
    result = run_events(recording, pet, policy)
    got = result.lesions
    want = recording.lesions
    if len(got) != len(want):
        got_ids = [l.lesion_id for l in got]
        want_ids = [l.lesion_id for l in want]
        diverging = next(
            (w for g, w in zip(got_ids, want_ids) if g != w),
            want_ids[len(got_ids)] if len(want_ids) > len(got_ids)
            else got_ids[len(want_ids)],
        )
        raise ReplayMismatchError(
            f"replay produced {len(got)} lesions, recording stores {len(want)} "
            f"(first divergence at lesion {diverging})",
            lesion_id=diverging,
        )
    for g, w in zip(got, want):
        diff = _first_difference(g, w)
        if diff is not None:
            raise ReplayMismatchError(
                f"replay diverged at lesion {w.lesion_id}: {diff}",
                lesion_id=w.lesion_id,
            )
    return result
