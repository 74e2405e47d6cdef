"""
Per-frame inference overhead of the query modules.
"""

import logging

import numpy as np

from qmvos.config.settings import RunConfig
from qmvos.pipelines.base import QUERY_STAGES, BenchReport, StageTimer
from qmvos.pipelines.segment import segment_video
from qmvos.tensorlab.optim import ParamStore

logger = logging.getLogger(__name__)


def bench_overhead(
    frames: np.ndarray,
    first_mask: np.ndarray,
    weights: ParamStore,
    cfg: RunConfig,
    *,
    baseline: bool = False,
    warmup: int = 1,
    runs: int = 3,
) -> BenchReport:
    """
    Time segmentation per stage and report the query-module share.

    Args:
        frames: (T, H, W, 3) uint8 video with T >= 2
        first_mask: (H, W) annotation of frame 0
        weights: Model weights
        cfg: Run configuration
        baseline: Bypass the query modules and use the static head
        warmup: Untimed runs before measuring
        runs: Timed runs; stage seconds are summed over them

    Returns:
        BenchReport; query_share is the median over runs of
        (SIM + QCIM + projection) / total
    """
    if baseline:
        cfg = cfg.model_copy(update={"querymod_enabled": False})
    mode = "baseline" if not cfg.querymod_enabled else "querymod"

    for _ in range(warmup):
        segment_video(frames, first_mask, weights, cfg)

    timer = StageTimer()
    shares: list[float] = []
    for _ in range(runs):
        run = StageTimer()
        segment_video(frames, first_mask, weights, cfg, timer=run)
        shares.append(run.share(QUERY_STAGES))
        timer.merge(run)

    predicted = runs * max(1, len(frames) - 1)
    report = BenchReport(
        mode=mode,
        frames=len(frames),
        runs=runs,
        stage_seconds=dict(timer.totals),
        per_frame_ms=1000.0 * timer.total / predicted,
        query_share=float(np.median(shares)) if shares else 0.0,
    )
    logger.info(
        f"⏱️  {mode}: {report.per_frame_ms:.2f} ms/frame, "
        f"query modules {100.0 * report.query_share:.1f}%"
    )
    return report
