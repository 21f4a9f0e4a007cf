"""Inter-annotator agreement: 3D box matching, P/R/% agreement and ICC."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats
from scipy.optimize import linear_sum_assignment

from gazebench.errors import UndefinedICCError
from gazebench.proposal.model import LesionAnnotation


@dataclass(frozen=True)
class Box3D:
    x: int
    y: int
    w: int
    h: int
    z_min: int
    z_max: int

    @property
    def voxel_volume(self) -> int:
        return self.w * self.h * (self.z_max - self.z_min + 1)

    def iou(self, other: "Box3D") -> float:
        ix = min(self.x + self.w, other.x + other.w) - max(self.x, other.x)
        iy = min(self.y + self.h, other.y + other.h) - max(self.y, other.y)
        iz = min(self.z_max, other.z_max) - max(self.z_min, other.z_min) + 1
        if ix <= 0 or iy <= 0 or iz <= 0:
            return 0.0
        inter = ix * iy * iz
        return inter / float(self.voxel_volume + other.voxel_volume - inter)


def merge_slices_to_3d(lesions: Sequence[LesionAnnotation]) -> List[Box3D]:
    """Each lesion's axis-aligned 3D bound: xy union over slices, z extent."""
    out = []
    for lesion in lesions:
        slices = sorted(lesion.slice_boxes)
        boxes = [lesion.slice_boxes[s].box for s in slices]
        x0 = min(b.x for b in boxes)
        y0 = min(b.y for b in boxes)
        x1 = max(b.x + b.w for b in boxes)
        y1 = max(b.y + b.h for b in boxes)
        out.append(
            Box3D(x=x0, y=y0, w=x1 - x0, h=y1 - y0, z_min=slices[0], z_max=slices[-1])
        )
    return out


@dataclass
class AgreementScores:
    precision: float
    recall: float
    pct_agreement: float
    matches: List[Tuple[int, int, float]]  # (index in a, index in b, IoU)

    @property
    def tp(self) -> int:
        return len(self.matches)


def match_and_agree(
    a: Sequence[Box3D], b: Sequence[Box3D], method: str = "greedy"
) -> AgreementScores:
    """One-to-one matching of 3D boxes at IoU > 0; a is the prediction side.

    greedy: descending-IoU pair adoption (deterministic; ties by index).
    optimal: exact max-total-IoU assignment, provided for audit.
    """
    pairs = []
    for i, box_a in enumerate(a):
        for j, box_b in enumerate(b):
            iou = box_a.iou(box_b)
            if iou > 0.0:
                pairs.append((iou, i, j))

    matches: List[Tuple[int, int, float]] = []
    if method == "greedy":
        pairs.sort(key=lambda t: (-t[0], t[1], t[2]))
        taken_a: set = set()
        taken_b: set = set()
        for iou, i, j in pairs:
            if i in taken_a or j in taken_b:
                continue
            taken_a.add(i)
            taken_b.add(j)
            matches.append((i, j, iou))
    elif method == "optimal":
        if pairs:
            cost = np.zeros((len(a), len(b)))
            for iou, i, j in pairs:
                cost[i, j] = -iou
            rows, cols = linear_sum_assignment(cost)
            for i, j in zip(rows, cols):
                if cost[i, j] < 0:
                    matches.append((int(i), int(j), -float(cost[i, j])))
    else:
        raise ValueError(f"method must be greedy|optimal, got {method!r}")

    tp = len(matches)
    fp = len(a) - tp
    fn = len(b) - tp
    precision = tp / len(a) if a else 1.0
    recall = tp / len(b) if b else 1.0
    denom = tp + fp + fn
    pct = tp / denom if denom else 1.0
    matches.sort(key=lambda t: (t[0], t[1]))
    return AgreementScores(precision, recall, pct, matches)


def icc_average_fixed_raters(
    measurements: np.ndarray, confidence: float = 0.95
) -> Tuple[float, Tuple[float, float]]:
    """Two-way mixed, consistency, average-measure ICC with its F-based CI.

    measurements: (n_targets, k_raters), no missing cells.
    """
    m = np.asarray(measurements, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError("measurements must be a 2D matrix")
    n, k = m.shape
    if n < 2 or k < 2:
        raise ValueError(f"need >= 2 targets and >= 2 raters, got {m.shape}")
    if np.isnan(m).any():
        raise ValueError("missing cells are not supported")

    grand = m.mean()
    row_means = m.mean(axis=1)
    col_means = m.mean(axis=0)
    ss_rows = float(k * ((row_means - grand) ** 2).sum())
    # residual form is exactly zero for identical columns (no cancellation)
    residual = m - row_means[:, None] - col_means[None, :] + grand
    ss_err = float((residual**2).sum())
    ms_rows = ss_rows / (n - 1)
    ms_err = ss_err / ((n - 1) * (k - 1))
    if ms_rows <= 0.0:
        raise UndefinedICCError("zero between-target variance; ICC undefined")

    icc = (ms_rows - ms_err) / ms_rows
    if ms_err == 0.0:
        return icc, (1.0, 1.0)
    alpha = 1.0 - confidence
    df1 = n - 1
    df2 = (n - 1) * (k - 1)
    f_value = ms_rows / ms_err
    f_low = f_value / stats.f.ppf(1 - alpha / 2, df1, df2)
    f_up = f_value * stats.f.ppf(1 - alpha / 2, df2, df1)
    return icc, (1.0 - 1.0 / f_low, 1.0 - 1.0 / f_up)


MeasurementFn = Callable[[Box3D], float]


def default_measurement(box: Box3D) -> float:
    return float(box.voxel_volume)


@dataclass
class PairAgreement:
    name_a: str
    name_b: str
    scores: AgreementScores
    icc: Optional[float] = None
    icc_ci95: Optional[Tuple[float, float]] = None

    def row(self) -> List[str]:
        icc_txt = "n/a"
        if self.icc is not None:
            icc_txt = f"{self.icc:.2f} [{self.icc_ci95[0]:.2f}-{self.icc_ci95[1]:.2f}]"
        return [
            f"{self.name_a} <-> {self.name_b}",
            f"{self.scores.precision:.4f}",
            f"{self.scores.recall:.4f}",
            f"{self.scores.pct_agreement:.4f}",
            icc_txt,
        ]


@dataclass
class AgreementReport:
    pairs: List[PairAgreement] = field(default_factory=list)

    def table_rows(self) -> List[List[str]]:
        rows = [["pair", "precision", "recall", "pct_agreement", "icc_95ci"]]
        rows.extend(p.row() for p in self.pairs)
        return rows

    def to_dict(self) -> dict:
        return {
            "pairs": [
                {
                    "a": p.name_a,
                    "b": p.name_b,
                    "precision": p.scores.precision,
                    "recall": p.scores.recall,
                    "pct_agreement": p.scores.pct_agreement,
                    "tp": p.scores.tp,
                    "icc": p.icc,
                    "icc_ci95": list(p.icc_ci95) if p.icc_ci95 else None,
                }
                for p in self.pairs
            ]
        }


def pooled_agreement(
    set_pairs: Sequence[Tuple[Sequence[LesionAnnotation], Sequence[LesionAnnotation]]],
    measurement: MeasurementFn = default_measurement,
    method: str = "greedy",
) -> PairAgreement:
    """Aggregate agreement across studies: TP/FP/FN summed, ICC pooled.

    Each pair is one study's (set A, set B); matching never crosses studies.
    """
    tp = fp = fn = 0
    rows = []
    for lesions_a, lesions_b in set_pairs:
        boxes_a = merge_slices_to_3d(lesions_a)
        boxes_b = merge_slices_to_3d(lesions_b)
        scores = match_and_agree(boxes_a, boxes_b, method=method)
        tp += scores.tp
        fp += len(boxes_a) - scores.tp
        fn += len(boxes_b) - scores.tp
        rows.extend(
            [measurement(boxes_a[i]), measurement(boxes_b[j])]
            for i, j, _ in scores.matches
        )
    precision = tp / (tp + fp) if tp + fp else 1.0
    recall = tp / (tp + fn) if tp + fn else 1.0
    pct = tp / (tp + fp + fn) if tp + fp + fn else 1.0
    pooled = PairAgreement(
        "pooled_a", "pooled_b", AgreementScores(precision, recall, pct, [])
    )
    pooled.scores.matches = [(0, 0, 0.0)] * tp  # carry the pooled TP count
    if len(rows) >= 2:
        try:
            pooled.icc, pooled.icc_ci95 = icc_average_fixed_raters(np.array(rows))
        except UndefinedICCError:
            pooled.icc = None
    return pooled


def agreement_report(
    annotation_sets: Dict[str, Sequence[LesionAnnotation]],
    measurement: MeasurementFn = default_measurement,
    method: str = "greedy",
) -> AgreementReport:
    """Pairwise agreement between named annotation sets.

    Unmatched lesions count in precision/recall/% agreement only; the ICC is
    computed on the matched pairs' measurement values (default: 3D box voxel
    volume), needing at least two matches.
    """
    names = list(annotation_sets)
    boxes = {name: merge_slices_to_3d(annotation_sets[name]) for name in names}
    report = AgreementReport()
    for idx, name_a in enumerate(names):
        for name_b in names[idx + 1 :]:
            scores = match_and_agree(boxes[name_a], boxes[name_b], method=method)
            pair = PairAgreement(name_a, name_b, scores)
            if len(scores.matches) >= 2:
                matrix = np.array(
                    [
                        [measurement(boxes[name_a][i]), measurement(boxes[name_b][j])]
                        for i, j, _ in scores.matches
                    ]
                )
                try:
                    pair.icc, pair.icc_ci95 = icc_average_fixed_raters(matrix)
                except UndefinedICCError:
                    pair.icc = None
            report.pairs.append(pair)
    return report
