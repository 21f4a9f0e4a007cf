"""Candidate lesion proposal, propagation and the annotation state machine."""

from gazebench.proposal.components import (
    label_components,
    nearest_candidate,
    threshold_components,
)
from gazebench.proposal.engine import (
    AnnotationEngine,
    ConfirmationEpisode,
    ProposalPolicy,
    propagate,
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

__all__ = [
    "AnnotationEngine",
    "AnnotationState",
    "Bbox",
    "CandidateBox",
    "Certainty",
    "ConfirmationEpisode",
    "LesionAnnotation",
    "Mode",
    "PendingCandidate",
    "ProposalPolicy",
    "SliceBox",
    "SliceStatus",
    "label_components",
    "nearest_candidate",
    "propagate",
    "threshold_components",
]
