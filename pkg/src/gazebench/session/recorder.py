"""Append-only 60Hz session recorder with synced gaze/display/pause lists."""

from __future__ import annotations

from typing import List, Optional

from gazebench.errors import StateError
from gazebench.proposal.model import LesionAnnotation
from gazebench.session.model import (
    DisplaySample,
    GazeSample,
    KeyEvent,
    SessionHeader,
    SessionRecording,
)


class SessionRecorder:
    """Owns the synced lists; single-writer, timestamps must not decrease.

    The recorder does not decide pause semantics itself: the driver passes
    the paused flag (manual pause or an open select..accept/reject span).
    """

    def __init__(self, header: SessionHeader):
        self._recording = SessionRecording(header=header)
        self._closed = False
        self._last_gaze_ts: Optional[int] = None
        self._last_key_ts: Optional[int] = None

    @property
    def closed(self) -> bool:
        return self._closed

    def ingest_tick(self, gaze: GazeSample, display: DisplaySample, paused: bool) -> None:
        """Append one synced element to all three lists atomically."""
        if self._closed:
            raise StateError("cannot ingest into a closed session")
        if self._last_gaze_ts is not None and gaze.system_time_stamp < self._last_gaze_ts:
            raise StateError(
                f"gaze timestamps must be non-decreasing "
                f"({gaze.system_time_stamp} < {self._last_gaze_ts})"
            )
        rec = self._recording
        rec.tobii_cam.append(gaze)
        rec.common_cam.append(display)
        rec.pauses.append(bool(paused))
        self._last_gaze_ts = gaze.system_time_stamp

    def record_key(self, event: KeyEvent) -> None:
        if self._closed:
            raise StateError("cannot record keys into a closed session")
        if self._last_key_ts is not None and event.system_time_stamp < self._last_key_ts:
            raise StateError("key timestamps must be non-decreasing")
        self._recording.key_events.append(event)
        self._last_key_ts = event.system_time_stamp

    def set_lesions(self, lesions: List[LesionAnnotation]) -> None:
        self._recording.lesions = list(lesions)

    def close(self) -> SessionRecording:
        self._closed = True
        self._recording.validate()
        return self._recording

    @property
    def recording(self) -> SessionRecording:
        return self._recording
