"""Gaze-anchored candidate proposal, resize, accept/reject/undo state machine.

The policy knobs here (filter IoU, resize factor, propagation stop rule) are
deliberate stand-ins for unpublished platform behaviour; they are grouped in
one object so alternates can be swapped in and tested.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from gazebench.errors import NoCandidateError, StateError
from gazebench.proposal.components import (
    gaze_distance,
    nearest_candidate,
    threshold_components,
)
from gazebench.proposal.model import (
    AnnotationState,
    Bbox,
    CandidateBox,
    Certainty,
    LesionAnnotation,
    Mode,
    PendingCandidate,
    SliceBox,
    SliceStatus,
)
from gazebench.volume.core import ScalarVolume

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProposalPolicy:
    filter_iou: float = 0.5          # overlap with accepted/rejected boxes that hides a component
    resize_factor: float = 0.9       # threshold multiplier per grow keypress
    threshold_floor: float = 0.1
    propagation_cap: int = 200       # max slices walked per z-direction


def _filtered(
    candidates: Iterable[CandidateBox],
    taken_boxes: List[Bbox],
    filter_iou: float,
) -> List[CandidateBox]:
    return [
        c
        for c in candidates
        if all(c.box.iou(t) <= filter_iou for t in taken_boxes)
    ]


def propagate(
    root: CandidateBox,
    pet: ScalarVolume,
    policy: ProposalPolicy = ProposalPolicy(),
    rejected_boxes: Optional[List[Tuple[int, Bbox]]] = None,
) -> Dict[int, SliceBox]:
    """Extend a root box into neighboring slices at the root threshold.

    Walks z+1, z+2, ... and z-1, z-2, ...; on each slice the component whose
    box overlaps (IoU > 0) the previous slice's box is adopted with status
    extrapolated; the walk stops per-direction at the first slice with no
    such component. Components hidden by the rejected-box filter are skipped.
    """
    rejected_boxes = rejected_boxes or []
    result = {
        root.slice_number: SliceBox(root.box, SliceStatus.VALIDATED, root.suv_threshold)
    }
    for step in (1, -1):
        prev_box = root.box
        z = root.slice_number + step
        walked = 0
        while 0 <= z < pet.nz and walked < policy.propagation_cap:
            comps = threshold_components(pet.slice_data(z), root.suv_threshold, z)
            taken = [b for s, b in rejected_boxes if s == z]
            comps = _filtered(comps, taken, policy.filter_iou)
            overlapping = [(c.box.iou(prev_box), i, c) for i, c in enumerate(comps)]
            overlapping = [t for t in overlapping if t[0] > 0.0]
            if not overlapping:
                break
            overlapping.sort(key=lambda t: (-t[0], t[1]))
            chosen = overlapping[0][2]
            result[z] = SliceBox(chosen.box, SliceStatus.EXTRAPOLATED, root.suv_threshold)
            prev_box = chosen.box
            z += step
            walked += 1
    return result


class AnnotationEngine:
    """Owns one study's AnnotationState; all mutations go through its methods.

    Intended to run on a single command context; the pure helpers
    (threshold_components, propagate) are reentrant.
    """

    def __init__(self, pet: ScalarVolume, policy: ProposalPolicy = ProposalPolicy()):
        self.pet = pet
        self.policy = policy
        self.state = AnnotationState()
        self.revision = 0
        self.episodes: List[ConfirmationEpisode] = []

    def _bump(self):
        self.revision += 1

    # -- selection ---------------------------------------------------------

    def propose(
        self,
        slice_number: int,
        gaze_image: Tuple[float, float],
        threshold: float,
        certainty: Certainty,
        gaze_display: Optional[Tuple[float, float]] = None,
        timestamp_us: int = 0,
    ) -> CandidateBox:
        """Offer the gaze-nearest unclaimed component at the given threshold."""
        if self.state.mode is not Mode.BROWSING:
            raise StateError("propose requires browsing mode")
        comps = threshold_components(self.pet.slice_data(slice_number), threshold, slice_number)
        taken = self.state.accepted_boxes_on(slice_number) + self.state.rejected_boxes_on(
            slice_number
        )
        comps = _filtered(comps, taken, self.policy.filter_iou)
        if not comps:
            raise NoCandidateError(
                f"no unclaimed component at threshold {threshold:.4g} on slice "
                f"{slice_number}; raise the contrast and select again"
            )
        chosen = nearest_candidate(comps, gaze_image)
        self.state.pending = PendingCandidate(
            candidate=chosen,
            certainty=certainty,
            select_gaze_display=tuple(gaze_display or gaze_image),
            select_gaze_image=tuple(gaze_image),
        )
        self._open_episode(timestamp_us)
        self._bump()
        return chosen

    # -- resize ------------------------------------------------------------

    def resize(self, direction: str) -> CandidateBox:
        """Grow or shrink the pending candidate by stepping its SUV threshold."""
        if self.state.mode is not Mode.CONFIRMATION:
            raise StateError("resize requires a pending candidate")
        pending = self.state.pending
        if direction == "grow":
            raw = pending.candidate.suv_threshold * self.policy.resize_factor
        elif direction == "shrink":
            raw = pending.candidate.suv_threshold / self.policy.resize_factor
        else:
            raise ValueError(f"direction must be grow|shrink, got {direction!r}")

        slice_number = pending.candidate.slice_number
        plane = self.pet.slice_data(slice_number)
        slice_max = float(plane.max())
        new_threshold = min(max(raw, self.policy.threshold_floor), slice_max)
        at_limit = new_threshold != raw

        comps = threshold_components(plane, new_threshold, slice_number)
        anchor = self._anchor_component(comps, pending.candidate)
        if anchor is None:
            pending.at_limit = True
            log.warning(
                "resize at limit: anchor vanished at threshold %.4g on slice %d",
                new_threshold, slice_number,
            )
            self._bump()
            return pending.candidate
        pending.candidate = anchor
        pending.at_limit = at_limit
        if at_limit:
            log.warning("resize clamped to threshold %.4g", new_threshold)
        self._bump()
        return anchor

    @staticmethod
    def _anchor_component(
        comps: List[CandidateBox], previous: CandidateBox
    ) -> Optional[CandidateBox]:
        if not comps:
            return None
        cx, cy = previous.box.center
        containing = [c for c in comps if c.box.contains(cx, cy)]
        if containing:
            # smallest containing box keeps the candidate visually tight
            return min(containing, key=lambda c: c.box.area)
        return nearest_candidate(comps, (cx, cy))

    # -- accept / reject / undo --------------------------------------------

    def accept(self, timestamp_us: int = 0) -> LesionAnnotation:
        """Confirm the pending candidate and propagate it in both z-directions."""
        if self.state.mode is not Mode.CONFIRMATION:
            raise StateError("accept requires a pending candidate")
        pending = self.state.pending
        slice_boxes = propagate(
            pending.candidate, self.pet, self.policy, self.state.rejected_boxes
        )
        lesion = LesionAnnotation(
            lesion_id=self.state.next_lesion_id,
            certainty=pending.certainty,
            root_slice=pending.candidate.slice_number,
            suv_threshold=pending.candidate.suv_threshold,
            slice_boxes=slice_boxes,
            select_gaze=pending.select_gaze_display,
            select_time_us=self.episodes[-1].select_time_us if self.episodes else 0,
        )
        self.state.next_lesion_id += 1
        self.state.accepted.append(lesion)
        self.state.pending = None
        self._close_episode("accepted", lesion, timestamp_us)
        self._bump()
        return lesion

    def rejected_episode_boxes(self) -> List[ConfirmationEpisode]:
        return [e for e in self.episodes if e.outcome == "rejected"]

    def reject_current(self, timestamp_us: int = 0) -> bool:
        """Reject the pending candidate on its slice; returns False on no-op."""
        if self.state.mode is not Mode.CONFIRMATION:
            log.warning("reject ignored: nothing pending")
            return False
        pending = self.state.pending
        self.state.rejected_boxes.append(
            (pending.candidate.slice_number, pending.candidate.box)
        )
        self.state.pending = None
        self._close_episode("rejected", None, timestamp_us, pending.candidate.box)
        self._bump()
        return True

    def reject_adjacent(
        self, slice_number: int, gaze_image: Tuple[float, float]
    ) -> Optional[int]:
        """Reject the gaze-nearest accepted lesion across all its slices."""
        if self.state.mode is not Mode.BROWSING:
            log.warning("reject-adjacent ignored during confirmation")
            return None
        lesion = self._nearest_lesion_on(slice_number, gaze_image)
        if lesion is None:
            log.warning("reject-adjacent ignored: no lesion box on slice %d", slice_number)
            return None
        self.state.accepted.remove(lesion)
        for s, sb in sorted(lesion.slice_boxes.items()):
            self.state.rejected_boxes.append((s, sb.box))
        self._bump()
        return lesion.lesion_id

    def undo(self, slice_number: int, gaze_image: Tuple[float, float]) -> Optional[int]:
        """Remove the accepted lesion nearest to gaze on this slice, everywhere."""
        lesion = self._nearest_lesion_on(slice_number, gaze_image)
        if lesion is None:
            log.warning("undo ignored: no accepted lesion on slice %d", slice_number)
            return None
        self.state.accepted.remove(lesion)
        self._bump()
        return lesion.lesion_id

    def clear_rejections(self, slice_number: Optional[int] = None) -> int:
        """Forget rejected boxes (one slice, or all) so they can be re-proposed."""
        before = len(self.state.rejected_boxes)
        if slice_number is None:
            self.state.rejected_boxes = []
        else:
            self.state.rejected_boxes = [
                (s, b) for s, b in self.state.rejected_boxes if s != slice_number
            ]
        self._bump()
        return before - len(self.state.rejected_boxes)

    def _nearest_lesion_on(
        self, slice_number: int, gaze_image: Tuple[float, float]
    ) -> Optional[LesionAnnotation]:
        best = None
        best_key = None
        for idx, lesion in enumerate(self.state.accepted):
            sb = lesion.slice_boxes.get(slice_number)
            if sb is None:
                continue
            key = (gaze_distance(sb.box, gaze_image), sb.box.area, idx)
            if best_key is None or key < best_key:
                best, best_key = lesion, key
        return best

    # -- episode log (select..accept/reject), used by postprocessing -------

    def _open_episode(self, timestamp_us: int):
        self.episodes.append(
            ConfirmationEpisode(
                select_time_us=timestamp_us,
                slice_number=self.state.pending.candidate.slice_number,
                certainty=self.state.pending.certainty,
                select_gaze_image=self.state.pending.select_gaze_image,
            )
        )

    def _close_episode(
        self,
        outcome: str,
        lesion: Optional[LesionAnnotation],
        ts: int,
        box: Optional[Bbox] = None,
    ):
        ep = self.episodes[-1]
        ep.outcome = outcome
        ep.close_time_us = ts
        if lesion is not None:
            ep.final_box = lesion.slice_boxes[lesion.root_slice].box
            ep.lesion_id = lesion.lesion_id
        else:
            ep.final_box = box


@dataclass
class ConfirmationEpisode:
    """One select..accept/reject span, for window extraction and calibration."""

    select_time_us: int
    slice_number: int
    certainty: Certainty
    select_gaze_image: Tuple[float, float]
    outcome: Optional[str] = None  # accepted | rejected
    close_time_us: Optional[int] = None
    final_box: Optional[Bbox] = None
    lesion_id: Optional[int] = None
