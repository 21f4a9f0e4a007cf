"""Exception types shared across the workbench."""


class GazebenchError(Exception):
    """Base class for all workbench errors."""


class FormatError(GazebenchError):
    """A file is structurally malformed (bad magic, bad header fields)."""


class UnsupportedError(GazebenchError):
    """A file is well-formed but uses a feature outside the supported subset."""


class BoundsError(GazebenchError, IndexError):
    """An index (slice number, pixel) is outside the valid range."""


class PhantomSpecError(GazebenchError):
    """A synthetic phantom specification is invalid (e.g. overlapping spheres)."""


class NoCandidateError(GazebenchError):
    """No surviving component to propose; the UI should suggest raising contrast."""


class StateError(GazebenchError):
    """An operation was issued in the wrong annotation/session state."""


class IntegrityError(GazebenchError):
    """A recording violates a structural invariant (e.g. synced-list lengths)."""


class ReplayMismatchError(GazebenchError):
    """Replay of a recording diverged from its stored lesion set."""

    def __init__(self, message, lesion_id=None, slice_number=None):
        super().__init__(message)
        self.lesion_id = lesion_id
        self.slice_number = slice_number


class DegenerateGeometryError(GazebenchError):
    """A gaze vector has zero length; the angle is undefined."""


class EmptyReportError(GazebenchError):
    """No qualifying data to build the requested metric report."""


class UndefinedICCError(GazebenchError):
    """ICC is undefined (zero between-target variance)."""


class ExportError(GazebenchError):
    """A dataset export could not be completed (e.g. unresolvable volumes)."""

    def __init__(self, message, paths=()):
        super().__init__(message)
        self.paths = list(paths)


class ProtocolError(GazebenchError):
    """A client message violated the gateway protocol."""
