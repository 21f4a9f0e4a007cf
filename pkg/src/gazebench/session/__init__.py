"""Synchronized 60Hz session recording, emission/parsing and replay."""

from gazebench.session.driver import WorkbenchSession, apply_annotation_key
from gazebench.session.io import (
    GAZEDOTS_FILE,
    KEYS_FILE,
    LESIONS_FILE,
    append_metadata,
    emit_session,
    parse_session,
    session_dir_for,
)
from gazebench.session.keys import KEY_ACTIONS, action_for, load_remap
from gazebench.session.mapping import image_to_monitor, map_gaze_to_image, monitor_point
from gazebench.session.model import (
    DisplaySample,
    EyeSample,
    GazeSample,
    KeyEvent,
    SessionHeader,
    SessionRecording,
    ViewModality,
)
from gazebench.session.recorder import SessionRecorder
from gazebench.session.replay import ReplayResult, replay, run_events

__all__ = [
    "DisplaySample",
    "EyeSample",
    "GAZEDOTS_FILE",
    "GazeSample",
    "KEYS_FILE",
    "KEY_ACTIONS",
    "KeyEvent",
    "LESIONS_FILE",
    "ReplayResult",
    "SessionHeader",
    "SessionRecorder",
    "SessionRecording",
    "ViewModality",
    "WorkbenchSession",
    "action_for",
    "append_metadata",
    "apply_annotation_key",
    "emit_session",
    "image_to_monitor",
    "load_remap",
    "map_gaze_to_image",
    "monitor_point",
    "parse_session",
    "replay",
    "run_events",
    "session_dir_for",
]
