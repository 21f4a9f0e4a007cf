"""Quantitative analyses: calibration, agreement, segmentation metrics."""

from gazebench.metrics.agreement import (
    AgreementReport,
    AgreementScores,
    Box3D,
    agreement_report,
    icc_average_fixed_raters,
    match_and_agree,
    merge_slices_to_3d,
)
from gazebench.metrics.calibration import (
    CalibrationReport,
    LesionCalibration,
    calibration_metrics,
)
from gazebench.metrics.geometry import ViewingGeometry, angle_between, min_angle_to_pixels
from gazebench.metrics.masks import (
    GazeCorrectionCase,
    GazeCorrectionResult,
    dice,
    gaze_correction_eval,
    lesion_pr,
    mean_point_to_mask,
)

__all__ = [
    "AgreementReport",
    "AgreementScores",
    "Box3D",
    "CalibrationReport",
    "GazeCorrectionCase",
    "GazeCorrectionResult",
    "LesionCalibration",
    "ViewingGeometry",
    "agreement_report",
    "angle_between",
    "calibration_metrics",
    "dice",
    "gaze_correction_eval",
    "icc_average_fixed_raters",
    "lesion_pr",
    "match_and_agree",
    "mean_point_to_mask",
    "merge_slices_to_3d",
    "min_angle_to_pixels",
]
