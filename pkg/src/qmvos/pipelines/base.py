"""
Base pipeline abstractions.
"""

import time
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from qmvos.config.settings import RunConfig
from qmvos.membank.bank import MemoryBank
from qmvos.querymod.types import ObjectQuerySet
from qmvos.tensorlab.optim import ParamStore

# Stages whose time counts as query-module overhead.
QUERY_STAGES = ("sim", "qcim", "project")


class StageTimer:
    """
    Accumulates wall-clock seconds per named stage.

    Example:
        >>> timer = StageTimer()
        >>> with timer.stage("encode"):
        ...     pyr = encode_frame(image, w)
        >>> timer.totals["encode"]
    """

    def __init__(self) -> None:
        self.totals: dict[str, float] = {}

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            self.totals[name] = self.totals.get(name, 0.0) + time.perf_counter() - start

    def merge(self, other: "StageTimer") -> None:
        """Add another timer's totals into this one."""
        for name, seconds in other.totals.items():
            self.totals[name] = self.totals.get(name, 0.0) + seconds

    def reset(self) -> None:
        self.totals.clear()

    @property
    def total(self) -> float:
        return sum(self.totals.values())

    def share(self, stages: tuple[str, ...]) -> float:
        """Fraction of the total spent in `stages` (0 when nothing was timed)."""
        total = self.total
        if total <= 0.0:
            return 0.0
        return sum(self.totals.get(s, 0.0) for s in stages) / total


@dataclass
class VideoState:
    """
    Per-video state carried from frame to frame.

    `queries` always come from the previous frame's features and masks (frame
    0: the annotation), unless query propagation is switched off.
    """

    t: int
    bank: MemoryBank
    queries: ObjectQuerySet
    n_objects: int
    cfg: RunConfig


@dataclass
class SegResult:
    """
    Output of segmenting one video.

    Attributes:
        labels: Per-frame (H, W) uint8 label maps, 0 = background
        probabilities: Per-frame (N+1, H, W) channel probabilities
        timings: Seconds per pipeline stage over frames 1..T-1
        memorized_frames: Frame indices inserted into memory, in order
    """

    labels: list[np.ndarray] = field(default_factory=list)
    probabilities: list[np.ndarray] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)
    memorized_frames: list[int] = field(default_factory=list)

    @property
    def n_frames(self) -> int:
        return len(self.labels)

    def label_array(self) -> np.ndarray:
        return np.stack(self.labels)

    def timing_report(self) -> dict[str, Any]:
        """Timing summary suitable for JSON."""
        predicted = max(1, self.n_frames - 1)
        total = sum(self.timings.values())
        return {
            "frames": self.n_frames,
            "stage_seconds": dict(sorted(self.timings.items())),
            "total_seconds": total,
            "per_frame_ms": 1000.0 * total / predicted,
            "memorized_frames": self.memorized_frames,
        }


@dataclass
class TrainResult:
    """Trained weights and the per-step loss curve."""

    weights: ParamStore
    losses: list[float] = field(default_factory=list)
    skipped_videos: list[int] = field(default_factory=list)

    @property
    def initial_loss(self) -> float:
        return self.losses[0] if self.losses else float("nan")

    @property
    def final_loss(self) -> float:
        return self.losses[-1] if self.losses else float("nan")


@dataclass
class BenchReport:
    """Per-frame inference timing with the query-module share."""

    mode: str
    frames: int
    runs: int
    stage_seconds: dict[str, float]
    per_frame_ms: float
    query_share: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "mode": self.mode,
            "frames": self.frames,
            "runs": self.runs,
            "stage_seconds": dict(sorted(self.stage_seconds.items())),
            "per_frame_ms": self.per_frame_ms,
            "query_share": self.query_share,
            "query_share_percent": 100.0 * self.query_share,
        }
