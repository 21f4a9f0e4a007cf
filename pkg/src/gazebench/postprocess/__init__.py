"""Postprocessing: heatmaps, pseudo-segmentations, windows, COCO exports."""

from gazebench.postprocess.artifacts import (
    write_gaze_artifacts,
    write_pseudo_seg_artifact,
)
from gazebench.postprocess.coco import (
    StudyRead,
    export_checksums,
    export_coco,
    split_studies,
    validate_export,
)
from gazebench.postprocess.heatmap import (
    GazeHeatmapVolume,
    HeatmapReport,
    build_heatmap,
    build_mip_view_heatmap,
    heatmap_mip,
)
from gazebench.postprocess.pseudoseg import PseudoSegResult, build_pseudo_seg
from gazebench.postprocess.windows import (
    HotSpotConfig,
    TrajectorySample,
    TrajectoryWindow,
    WindowReport,
    extract_intent_windows,
    extract_selection_windows,
    find_hotspots,
)

__all__ = [
    "GazeHeatmapVolume",
    "HeatmapReport",
    "HotSpotConfig",
    "PseudoSegResult",
    "StudyRead",
    "TrajectorySample",
    "TrajectoryWindow",
    "WindowReport",
    "build_heatmap",
    "build_mip_view_heatmap",
    "build_pseudo_seg",
    "export_checksums",
    "export_coco",
    "extract_intent_windows",
    "extract_selection_windows",
    "find_hotspots",
    "heatmap_mip",
    "split_studies",
    "validate_export",
    "write_gaze_artifacts",
    "write_pseudo_seg_artifact",
]
