"""
Region (J) and boundary (F) accuracy for label maps.

Label maps are HxW integer arrays; 0 is background and 1..N are objects.
"""

import json
import logging
import math
from collections.abc import Sequence
from typing import Any

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from pydantic import BaseModel, Field

from qmvos.core.exceptions import InputError, ShapeError

logger = logging.getLogger(__name__)

# Boundary tolerance as a fraction of the image diagonal.
TOL_FRACTION = 0.008

# A frame counts towards recall when its J (or F) exceeds this.
RECALL_THRESHOLD = 0.5


def _check_pair(op: str, pred: np.ndarray, gt: np.ndarray) -> None:
    if pred.shape != gt.shape:
        raise ShapeError(op, f"prediction {pred.shape} and ground truth {gt.shape} differ")
    if pred.ndim != 2:
        raise ShapeError(op, f"expected HxW label maps, got {pred.shape}")


def jaccard(pred: np.ndarray, gt: np.ndarray, obj: int) -> float:
    """
    Intersection over union of object `obj` in two label maps.

    Both regions empty gives 1.
    """
    _check_pair("jaccard", pred, gt)
    p, g = pred == obj, gt == obj
    union = np.count_nonzero(p | g)
    if union == 0:
        return 1.0
    return np.count_nonzero(p & g) / union


def boundary_map(region: np.ndarray) -> np.ndarray:
    """Region pixels with at least one 4-neighbour outside the region (or the image)."""
    padded = np.pad(region.astype(bool), 1, constant_values=False)
    interior = (
        padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:]
    )
    return region.astype(bool) & ~interior


def dilate(mask: np.ndarray, radius: int) -> np.ndarray:
    """Binary dilation with a (2r+1)x(2r+1) square, i.e. Chebyshev distance <= r."""
    if radius <= 0:
        return mask.astype(bool)
    padded = np.pad(mask.astype(bool), radius, constant_values=False)
    windows = sliding_window_view(padded, (2 * radius + 1, 2 * radius + 1))
    return windows.any(axis=(-2, -1))


def default_tol_radius(height: int, width: int) -> int:
    """max(1, round(0.008 * diagonal)), rounding halves up."""
    return max(1, math.floor(TOL_FRACTION * math.hypot(height, width) + 0.5))


def contour_f(
    pred: np.ndarray, gt: np.ndarray, obj: int, tol_radius: int | None = None
) -> float:
    """
    Boundary F-measure of object `obj`.

    A boundary pixel of one map is matched when the other map has a boundary
    pixel within Chebyshev distance `tol_radius`.

    Args:
        pred: Predicted label map
        gt: Ground-truth label map
        obj: Object label
        tol_radius: Matching tolerance; defaults to default_tol_radius

    Returns:
        2PR/(P+R); 1 when both boundaries are empty, 0 when only one is
    """
    _check_pair("contour_f", pred, gt)
    if tol_radius is None:
        tol_radius = default_tol_radius(*gt.shape)

    bp = boundary_map(pred == obj)
    bg = boundary_map(gt == obj)
    n_pred, n_gt = np.count_nonzero(bp), np.count_nonzero(bg)
    if n_pred == 0 and n_gt == 0:
        return 1.0
    if n_pred == 0 or n_gt == 0:
        return 0.0

    precision = np.count_nonzero(bp & dilate(bg, tol_radius)) / n_pred
    recall = np.count_nonzero(bg & dilate(bp, tol_radius)) / n_gt
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


class MetricReport(BaseModel):
    """
    Per-object, per-frame J and F with their aggregates.

    `j[n][i]` is object n+1 on evaluated frame `frames[i]`. Recall and decay
    are the usual sequence statistics (fraction of frames above 0.5, first
    quarter mean minus last quarter mean).
    """

    frames: list[int]
    j: list[list[float]]
    f: list[list[float]]
    j_per_object: list[float]
    f_per_object: list[float]
    j_mean: float = Field(ge=0.0, le=1.0)
    f_mean: float = Field(ge=0.0, le=1.0)
    j_and_f: float = Field(ge=0.0, le=1.0)
    j_recall: float = Field(ge=0.0, le=1.0)
    f_recall: float = Field(ge=0.0, le=1.0)
    j_decay: float = Field(ge=-1.0, le=1.0)
    f_decay: float = Field(ge=-1.0, le=1.0)

    def to_json(self) -> str:
        """JSON document with keys in field order."""
        return json.dumps(self.model_dump(), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "MetricReport":
        return cls.model_validate_json(text)

    def summary(self) -> dict[str, Any]:
        return {"J": self.j_mean, "F": self.f_mean, "J&F": self.j_and_f}


def _decay(values: np.ndarray) -> float:
    bins = np.array_split(values, 4)
    if any(b.size == 0 for b in bins):
        return 0.0
    return float(bins[0].mean() - bins[-1].mean())


def j_and_f(
    j: np.ndarray | Sequence[Sequence[float]],
    f: np.ndarray | Sequence[Sequence[float]],
    frames: Sequence[int] | None = None,
) -> MetricReport:
    """
    Aggregate per-object, per-frame scores.

    Args:
        j: (N, T') Jaccard scores
        f: (N, T') boundary F scores
        frames: Frame indices of the T' columns (default 1..T')

    Returns:
        MetricReport whose global J and F are means over objects of per-object
        means over frames

    Raises:
        InputError: If there is nothing to evaluate
    """
    j_arr = np.asarray(j, dtype=np.float64)
    f_arr = np.asarray(f, dtype=np.float64)
    if j_arr.ndim != 2 or j_arr.shape != f_arr.shape:
        raise ShapeError("j_and_f", f"J {j_arr.shape} and F {f_arr.shape} must be matching (N, T)")
    if j_arr.size == 0:
        raise InputError("frames", "empty evaluation set")
    frames = list(frames) if frames is not None else list(range(1, j_arr.shape[1] + 1))

    j_obj = j_arr.mean(axis=1)
    f_obj = f_arr.mean(axis=1)
    j_mean = float(j_obj.mean())
    f_mean = float(f_obj.mean())
    return MetricReport(
        frames=frames,
        j=j_arr.tolist(),
        f=f_arr.tolist(),
        j_per_object=j_obj.tolist(),
        f_per_object=f_obj.tolist(),
        j_mean=j_mean,
        f_mean=f_mean,
        j_and_f=(j_mean + f_mean) / 2.0,
        j_recall=float(np.mean(j_arr > RECALL_THRESHOLD)),
        f_recall=float(np.mean(f_arr > RECALL_THRESHOLD)),
        j_decay=float(np.mean([_decay(row) for row in j_arr])),
        f_decay=float(np.mean([_decay(row) for row in f_arr])),
    )


def evaluate_sequence(
    preds: Sequence[np.ndarray],
    gts: Sequence[np.ndarray],
    n_objects: int | None = None,
    tol_radius: int | None = None,
) -> MetricReport:
    """
    Score a predicted label sequence against ground truth.

    Frame 0 is the given annotation and is excluded.

    Args:
        preds: Predicted label maps, one per frame
        gts: Ground-truth label maps
        n_objects: Objects to score (default: largest label in the first ground truth)
        tol_radius: Boundary tolerance (default per frame size)
    """
    if len(preds) != len(gts):
        raise InputError("pred", f"{len(preds)} predicted frames, {len(gts)} ground-truth frames")
    if len(gts) < 2:
        raise InputError("frames", "empty evaluation set (only the annotated frame)")
    if n_objects is None:
        n_objects = int(np.max(gts[0]))
    if n_objects < 1:
        raise InputError("gt", "first ground-truth frame contains no objects")

    frames = list(range(1, len(gts)))
    j = np.zeros((n_objects, len(frames)))
    f = np.zeros((n_objects, len(frames)))
    for col, t in enumerate(frames):
        for n in range(n_objects):
            j[n, col] = jaccard(preds[t], gts[t], n + 1)
            f[n, col] = contour_f(preds[t], gts[t], n + 1, tol_radius)

    report = j_and_f(j, f, frames)
    logger.debug(f"Evaluated {len(frames)} frames x {n_objects} objects: J&F={report.j_and_f:.4f}")
    return report
