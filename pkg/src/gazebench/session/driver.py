"""Live session driver: wires view state, recorder and the proposal engine.

Annotation keys act on the context of the last recorded tick at or before
the key's timestamp (its display sample and the last valid mapped gaze),
never on instantaneous view state, so a live session and its replay see
byte-identical inputs even when the transport batches messages.
"""

from __future__ import annotations

import logging
from bisect import bisect_right
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from gazebench.errors import NoCandidateError, StateError
from gazebench.proposal.engine import AnnotationEngine, ProposalPolicy
from gazebench.proposal.model import Certainty, Mode
from gazebench.session.keys import ACTION_FOR_CODE
from gazebench.session.mapping import map_gaze_to_image, monitor_point
from gazebench.session.model import (
    DisplaySample,
    GazeSample,
    KeyEvent,
    SessionHeader,
    SessionRecording,
    ViewModality,
)
from gazebench.session.recorder import SessionRecorder
from gazebench.volume.core import ScalarVolume

log = logging.getLogger(__name__)

# CT presets 1..9 as (window level, window width) in HU
CT_PRESETS: Dict[int, Tuple[float, float]] = {
    1: (40.0, 400.0),     # soft tissue
    2: (-600.0, 1500.0),  # lung
    3: (300.0, 1500.0),   # bone
    4: (40.0, 80.0),      # brain
    5: (60.0, 150.0),     # liver
    6: (50.0, 350.0),     # mediastinum
    7: (60.0, 400.0),     # abdomen
    8: (300.0, 600.0),    # angio
    9: (35.0, 35.0),      # stroke
}

PET_DEFAULT_NORM = (0.0, 10.0)
PET_LIVER_NORM_MAX = 6.0    # 'l': liver contrast, SUV max ~ 5-6
PET_BRAIN_NORM_MAX = 25.0   # 'b': brain contrast, SUV max > 20
PET_NORM_MAX_FLOOR = 0.5
PET_NORM_MAX_CEIL = 200.0
CONTRAST_STEP = 0.9


@dataclass
class KeyContext:
    """Snapshot the engine sees when an annotation key fires."""

    display: DisplaySample
    gaze_image: Optional[Tuple[float, float]]
    gaze_display: Optional[Tuple[float, float]]
    timestamp_us: int


ANNOTATION_ACTIONS = (
    "select_certain",
    "select_uncertain",
    "accept",
    "reject",
    "reject_adjacent",
    "grow_box",
    "shrink_box",
    "undo",
    "clear_rejections",
)


def apply_annotation_key(
    engine: AnnotationEngine, action: str, ctx: Optional[KeyContext]
) -> Optional[str]:
    """Drive the engine for one annotation key; returns a warning or None.

    Shared verbatim by live sessions and replay so both paths stay identical.
    """
    if ctx is None:
        return f"{action} ignored: no gaze tick seen yet"
    display = ctx.display
    slice_number = display.slice_number
    try:
        if action in ("select_certain", "select_uncertain"):
            if display.modality not in (ViewModality.PET, ViewModality.FUSED):
                return "select requires a PET or fused axial view"
            if ctx.gaze_image is None:
                return "select ignored: no valid gaze on the annotation window"
            if display.norm_max <= 0:
                return "select ignored: non-positive display threshold"
            certainty = (
                Certainty.CERTAIN if action == "select_certain" else Certainty.UNCERTAIN
            )
            engine.propose(
                slice_number,
                ctx.gaze_image,
                display.norm_max,
                certainty,
                gaze_display=ctx.gaze_display,
                timestamp_us=ctx.timestamp_us,
            )
        elif action == "accept":
            engine.accept(timestamp_us=ctx.timestamp_us)
        elif action == "reject":
            if not engine.reject_current(timestamp_us=ctx.timestamp_us):
                return "reject ignored: nothing pending"
        elif action == "reject_adjacent":
            if ctx.gaze_image is None:
                return "reject-adjacent ignored: no valid gaze"
            if engine.reject_adjacent(slice_number, ctx.gaze_image) is None:
                return "reject-adjacent ignored: no lesion under gaze"
        elif action in ("grow_box", "shrink_box"):
            engine.resize("grow" if action == "grow_box" else "shrink")
        elif action == "undo":
            if engine.state.mode is not Mode.BROWSING:
                return "undo ignored during confirmation"
            if ctx.gaze_image is None:
                return "undo ignored: no valid gaze"
            if engine.undo(slice_number, ctx.gaze_image) is None:
                return "undo ignored: no accepted lesion on this slice"
        elif action == "clear_rejections":
            engine.clear_rejections(slice_number)
        else:
            return f"unknown annotation action {action}"
    except (NoCandidateError, StateError) as exc:
        return str(exc)
    return None


class WorkbenchSession:
    """One study read: view state + recorder + engine behind key handling."""

    def __init__(
        self,
        pet: ScalarVolume,
        ct: Optional[ScalarVolume],
        header: SessionHeader,
        window_rect: Optional[Tuple[int, int, int, int]] = None,
        policy: ProposalPolicy = ProposalPolicy(),
    ):
        self.pet = pet
        self.ct = ct
        self.header = header
        self.engine = AnnotationEngine(pet, policy)
        self.recorder = SessionRecorder(header)
        if window_rect is None:
            ww, wh = header.display_window_dim
            window_rect = (
                (header.monitor_width - ww) // 2,
                (header.monitor_height - wh) // 2,
                ww,
                wh,
            )
        self.window_rect = window_rect

        self.slice_number = 0
        self.modality = ViewModality.PET
        self.pet_norm = PET_DEFAULT_NORM
        self.ct_preset = 1
        self.mip_angle = 0
        self.user_paused = False
        self.quit_pending = False
        self.save_choice: Optional[bool] = None
        self.finished: Optional[bool] = None  # save flag once Enter confirms

        self._tick_ts: List[int] = []
        self._tick_ctx: List[KeyContext] = []
        self._pending_select_display: Optional[DisplaySample] = None
        self.warnings: list = []

    # -- view state ----------------------------------------------------------

    def current_display_sample(self) -> DisplaySample:
        if self.modality is ViewModality.CT:
            level, width = CT_PRESETS[self.ct_preset]
            norm = (level - width / 2.0, level + width / 2.0)
        else:
            norm = self.pet_norm
        slice_field = self.mip_angle if self.modality is ViewModality.MIP else self.slice_number
        wx, wy, ww, wh = self.window_rect
        return DisplaySample(
            slice_number=slice_field,
            modality=self.modality,
            norm_min=float(norm[0]),
            norm_max=float(norm[1]),
            window_x=wx,
            window_y=wy,
            window_width=ww,
            window_height=wh,
            monitor_width=self.header.monitor_width,
            monitor_height=self.header.monitor_height,
            ct_window=self.ct_preset,
        )

    def set_view(
        self,
        slice_number: Optional[int] = None,
        modality: Optional[ViewModality] = None,
        mip_angle: Optional[int] = None,
        norm: Optional[Tuple[float, float]] = None,
        window_rect: Optional[Tuple[int, int, int, int]] = None,
    ) -> None:
        if slice_number is not None:
            self.slice_number = int(min(max(slice_number, 0), self.pet.nz - 1))
        if modality is not None:
            self.modality = modality
        if mip_angle is not None:
            self.mip_angle = int(mip_angle) % 12
        if norm is not None:
            self.pet_norm = (float(norm[0]), float(norm[1]))
        if window_rect is not None:
            self.window_rect = tuple(int(v) for v in window_rect)

    # -- the two input streams -------------------------------------------------

    def ingest_gaze(self, gaze: GazeSample) -> None:
        display = self.current_display_sample()
        paused = self.user_paused or self.engine.state.mode is Mode.CONFIRMATION
        self.recorder.ingest_tick(gaze, display, paused)
        gaze_image = map_gaze_to_image(gaze, display)
        prev = self._tick_ctx[-1] if self._tick_ctx else None
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
                gaze_image=prev.gaze_image if prev else None,
                gaze_display=prev.gaze_display if prev else None,
                timestamp_us=gaze.system_time_stamp,
            )
        self._tick_ts.append(gaze.system_time_stamp)
        self._tick_ctx.append(ctx)

    def _ctx_at(self, timestamp_us: int) -> Optional[KeyContext]:
        """Context of the last tick at or before the timestamp."""
        idx = bisect_right(self._tick_ts, timestamp_us) - 1
        if idx < 0:
            return None
        ctx = self._tick_ctx[idx]
        return KeyContext(ctx.display, ctx.gaze_image, ctx.gaze_display, timestamp_us)

    def handle_key(self, code: int, timestamp_us: int) -> Optional[str]:
        """Record and act on one key press; returns a warning message or None."""
        self.recorder.record_key(KeyEvent(timestamp_us, code))
        action = ACTION_FOR_CODE.get(code)
        if action is None:
            return f"unmapped key code {code}"
        if action in ANNOTATION_ACTIONS:
            return self._annotation_key(action, timestamp_us)
        return self._view_key(action)

    def _annotation_key(self, action: str, timestamp_us: int) -> Optional[str]:
        ctx = self._ctx_at(timestamp_us)
        select_display = ctx.display if ctx is not None else None
        lesions_before = len(self.engine.state.accepted)
        warning = apply_annotation_key(self.engine, action, ctx)
        if warning:
            self.warnings.append(warning)
            log.warning("%s", warning)
            return warning
        if action in ("select_certain", "select_uncertain"):
            self._pending_select_display = select_display
        elif action == "accept" and len(self.engine.state.accepted) > lesions_before:
            lesion = self.engine.state.accepted[-1]
            display = self._pending_select_display or select_display
            self.recorder.recording.lesion_displays[lesion.lesion_id] = display
            self._pending_select_display = None
        elif action == "undo":
            kept = {l.lesion_id for l in self.engine.state.accepted}
            displays = self.recorder.recording.lesion_displays
            for lesion_id in [i for i in displays if i not in kept]:
                del displays[lesion_id]
        return None

    def _view_key(self, action: str) -> Optional[str]:
        if action == "pause_toggle":
            self.user_paused = not self.user_paused
        elif action == "show_pet":
            self.modality = ViewModality.PET
        elif action == "show_ct":
            self.modality = ViewModality.CT
        elif action == "show_fused":
            self.modality = ViewModality.FUSED
        elif action == "show_mip":
            self.modality = ViewModality.MIP
        elif action == "liver_contrast":
            self.pet_norm = (0.0, PET_LIVER_NORM_MAX)
        elif action == "brain_contrast":
            self.pet_norm = (0.0, PET_BRAIN_NORM_MAX)
        elif action == "contrast_up":
            lo, hi = self.pet_norm
            self.pet_norm = (lo, max(PET_NORM_MAX_FLOOR, hi * CONTRAST_STEP))
        elif action == "contrast_down":
            lo, hi = self.pet_norm
            self.pet_norm = (lo, min(PET_NORM_MAX_CEIL, hi / CONTRAST_STEP))
        elif action == "next_slice":
            self.set_view(slice_number=self.slice_number + 1)
        elif action == "prev_slice":
            self.set_view(slice_number=self.slice_number - 1)
        elif action.startswith("ct_preset_"):
            self.ct_preset = int(action.rsplit("_", 1)[1])
        elif action == "quit":
            self.quit_pending = True
        elif action == "save_yes":
            if self.quit_pending:
                self.save_choice = True
        elif action == "save_no":
            if self.quit_pending:
                self.save_choice = False
        elif action == "confirm_enter":
            if self.quit_pending and self.save_choice is not None:
                self.finished = self.save_choice
        elif action == "toggle_overlay":
            pass  # display-only; never mutates state
        return None

    # -- closing ----------------------------------------------------------------

    def close(self, save: Optional[bool] = None) -> Optional[SessionRecording]:
        """Finish the session; returns the recording when save is confirmed."""
        if save is None:
            save = bool(self.finished)
        self.recorder.set_lesions(self.engine.state.accepted)
        recording = self.recorder.close()
        return recording if save else None
