"""
Evaluation metrics and synthetic benchmark videos.

Importing this package registers the built-in scenarios.
"""

from qmvos.evalsynth.metrics import (
    MetricReport,
    jaccard,
    contour_f,
    boundary_map,
    dilate,
    default_tol_radius,
    j_and_f,
    evaluate_sequence,
)
from qmvos.evalsynth.synthetic import (
    ShapeSpec,
    SyntheticVideo,
    DistinctLayout,
    SimilarLayout,
    OccludingLayout,
    frame_to_tensor,
    gen_synthetic,
)

__all__ = [
    "MetricReport",
    "jaccard",
    "contour_f",
    "boundary_map",
    "dilate",
    "default_tol_radius",
    "j_and_f",
    "evaluate_sequence",
    "ShapeSpec",
    "SyntheticVideo",
    "DistinctLayout",
    "SimilarLayout",
    "OccludingLayout",
    "frame_to_tensor",
    "gen_synthetic",
]
