"""Pipelines module: segmentation, training, benchmarking, gradient checks, ablations."""

from qmvos.pipelines.ablation import ArmResult, ToyProtocol, run_ablation, run_arm
from qmvos.pipelines.base import (
    QUERY_STAGES,
    BenchReport,
    SegResult,
    StageTimer,
    TrainResult,
    VideoState,
)
from qmvos.pipelines.bench import bench_overhead
from qmvos.pipelines.gradcheck import (
    GRADCHECK_THRESHOLD,
    SUITE,
    BlockResult,
    run_gradcheck_suite,
)
from qmvos.pipelines.model import init_model_weights, load_model_weights, model_param_shapes
from qmvos.pipelines.segment import (
    FrameOutput,
    SegmentationPipeline,
    propagate_queries,
    segment_video,
)
from qmvos.pipelines.train import train_toy

__all__ = [
    "QUERY_STAGES",
    "StageTimer",
    "VideoState",
    "SegResult",
    "TrainResult",
    "BenchReport",
    "FrameOutput",
    "SegmentationPipeline",
    "segment_video",
    "propagate_queries",
    "train_toy",
    "bench_overhead",
    "BlockResult",
    "GRADCHECK_THRESHOLD",
    "SUITE",
    "run_gradcheck_suite",
    "ArmResult",
    "ToyProtocol",
    "run_ablation",
    "run_arm",
    "init_model_weights",
    "load_model_weights",
    "model_param_shapes",
]
