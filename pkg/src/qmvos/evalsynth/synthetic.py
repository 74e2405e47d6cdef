"""
Seeded synthetic videos of moving rigid shapes.

Every video is drawn from a Philox generator seeded with the caller's seed, so
the same arguments always give byte-identical frames and labels. Objects are
painted in index order: a later object covers earlier ones where they overlap.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from qmvos.core.exceptions import InputError
from qmvos.core.registry import ComponentRegistry
from qmvos.tensorlab.init import seeded_rng
from qmvos.tensorlab.tensor import Tensor

logger = logging.getLogger(__name__)

BACKGROUND = (24, 24, 32)
TEXTURE_AMPLITUDE = 6

# Layout redraws allowed until every object shows in frame 0.
MAX_LAYOUT_ATTEMPTS = 100

# Well-separated object colours for the distinct and occluding scenarios.
PALETTE = (
    (230, 60, 50),
    (60, 200, 80),
    (60, 100, 230),
    (235, 200, 40),
    (200, 70, 210),
    (50, 210, 210),
    (240, 140, 40),
    (150, 150, 150),
)

SIMILAR_COLOR = (210, 120, 60)


@dataclass(frozen=True)
class ShapeSpec:
    """
    One object's appearance and motion.

    Attributes:
        kind: "disk" or "rect"
        size: Radius for disks, half extents (hy, hx) for rectangles
        color: RGB fill
        start: Centre (y, x) at frame 0
        velocity: Pixels per frame (vy, vx); centres bounce off the frame edges
    """

    kind: Literal["disk", "rect"]
    size: tuple[float, float]
    color: tuple[int, int, int]
    start: tuple[float, float]
    velocity: tuple[float, float]

    def extent(self) -> tuple[float, float]:
        """Half extents (y, x) of the bounding box."""
        if self.kind == "disk":
            return self.size[0], self.size[0]
        return self.size

    def center(self, t: int, height: int, width: int) -> tuple[float, float]:
        """Centre at frame t under reflective motion inside the frame."""
        ey, ex = self.extent()
        return (
            _bounce(self.start[0], self.velocity[0], t, ey, height - 1 - ey),
            _bounce(self.start[1], self.velocity[1], t, ex, width - 1 - ex),
        )

    def rasterize(self, t: int, height: int, width: int) -> np.ndarray:
        """Boolean HxW coverage at frame t (pixel centres at integer coordinates)."""
        cy, cx = self.center(t, height, width)
        yy, xx = np.mgrid[0:height, 0:width]
        if self.kind == "disk":
            r = self.size[0]
            return (yy - cy) ** 2 + (xx - cx) ** 2 <= r * r
        hy, hx = self.size
        return (np.abs(yy - cy) <= hy) & (np.abs(xx - cx) <= hx)


def _bounce(start: float, velocity: float, t: int, lo: float, hi: float) -> float:
    """Closed-form position of a point bouncing between lo and hi."""
    span = hi - lo
    if span <= 0:
        return (lo + hi) / 2.0
    p = (start - lo + velocity * t) % (2.0 * span)
    return lo + (p if p <= span else 2.0 * span - p)


@dataclass
class SyntheticVideo:
    """Frames (T, H, W, 3) uint8 and labels (T, H, W) uint8 with their shapes."""

    frames: np.ndarray
    labels: np.ndarray
    shapes: list[ShapeSpec] = field(default_factory=list)
    scenario: str = "distinct"
    seed: int = 0

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def n_objects(self) -> int:
        return len(self.shapes) if self.shapes else int(self.labels.max())

    def frame_tensors(self) -> list[Tensor]:
        return [frame_to_tensor(f) for f in self.frames]


def frame_to_tensor(rgb: np.ndarray) -> Tensor:
    """(H, W, 3) uint8 -> (3, H, W) tensor in [0, 1]."""
    return Tensor(np.transpose(rgb, (2, 0, 1)).astype(np.float64) / 255.0)


def _random_size(
    rng: np.random.Generator, kind: str, height: int, width: int
) -> tuple[float, float]:
    base = min(height, width)
    if kind == "disk":
        r = float(rng.uniform(0.08, 0.14) * base)
        return r, r
    return float(rng.uniform(0.07, 0.13) * base), float(rng.uniform(0.07, 0.13) * base)


def _random_motion(
    rng: np.random.Generator, kind: str, size: tuple[float, float], height: int, width: int
) -> tuple[tuple[float, float], tuple[float, float]]:
    ey, ex = (size[0], size[0]) if kind == "disk" else size
    start = (float(rng.uniform(ey, height - 1 - ey)), float(rng.uniform(ex, width - 1 - ex)))
    speed = float(rng.uniform(0.6, 1.8))
    angle = float(rng.uniform(0.0, 2.0 * math.pi))
    return start, (speed * math.sin(angle), speed * math.cos(angle))


@ComponentRegistry.register_scenario("distinct")
class DistinctLayout:
    """Differently coloured shapes of random kind, size and motion."""

    @property
    def name(self) -> str:
        return "distinct"

    def layout(
        self, rng: np.random.Generator, n_objects: int, n_frames: int, height: int, width: int
    ) -> list[ShapeSpec]:
        shapes = []
        for i in range(n_objects):
            kind = "disk" if rng.random() < 0.5 else "rect"
            size = _random_size(rng, kind, height, width)
            start, velocity = _random_motion(rng, kind, size, height, width)
            shapes.append(ShapeSpec(kind, size, PALETTE[i % len(PALETTE)], start, velocity))
        return shapes


@ComponentRegistry.register_scenario("similar")
class SimilarLayout:
    """Identical shapes in one colour; only position and motion tell them apart."""

    @property
    def name(self) -> str:
        return "similar"

    def layout(
        self, rng: np.random.Generator, n_objects: int, n_frames: int, height: int, width: int
    ) -> list[ShapeSpec]:
        size = _random_size(rng, "disk", height, width)
        shapes = []
        for _ in range(n_objects):
            start, velocity = _random_motion(rng, "disk", size, height, width)
            shapes.append(ShapeSpec("disk", size, SIMILAR_COLOR, start, velocity))
        return shapes


@ComponentRegistry.register_scenario("occluding")
class OccludingLayout:
    """
    Shapes on a shared horizontal track moving towards each other.

    Neighbouring objects start a half-frame apart with opposite velocities and
    cross around the middle of the video.
    """

    @property
    def name(self) -> str:
        return "occluding"

    def layout(
        self, rng: np.random.Generator, n_objects: int, n_frames: int, height: int, width: int
    ) -> list[ShapeSpec]:
        size = _random_size(rng, "disk", height, width)
        r = size[0]
        track = height / 2.0
        speed = 0.5 * width / max(2, n_frames - 1)
        shapes = []
        for i in range(n_objects):
            left = i % 2 == 0
            x0 = (0.25 if left else 0.75) * (width - 1)
            y0 = float(np.clip(track + rng.uniform(-0.3, 0.3) * r, r, height - 1 - r))
            velocity = (0.0, speed if left else -speed)
            shapes.append(ShapeSpec("disk", size, PALETTE[i % len(PALETTE)], (y0, x0), velocity))
        return shapes


def render(
    shapes: list[ShapeSpec], n_frames: int, height: int, width: int, texture: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Paint shapes over a static background; returns (frames, labels)."""
    frames = np.empty((n_frames, height, width, 3), dtype=np.uint8)
    labels = np.zeros((n_frames, height, width), dtype=np.uint8)
    for t in range(n_frames):
        frame = texture.copy()
        for i, shape in enumerate(shapes):
            covered = shape.rasterize(t, height, width)
            frame[covered] = shape.color
            labels[t][covered] = i + 1
        frames[t] = frame
    return frames, labels


def gen_synthetic(
    seed: int,
    n_objects: int,
    n_frames: int,
    height: int,
    width: int,
    scenario: str = "distinct",
) -> SyntheticVideo:
    """
    Generate a synthetic multi-object video.

    Args:
        seed: Generator seed
        n_objects: Objects to draw (1..255)
        n_frames: Frames to render
        height: Frame height (positive multiple of 16)
        width: Frame width (positive multiple of 16)
        scenario: Registered scenario name ("distinct", "similar", "occluding")

    Returns:
        SyntheticVideo

    Raises:
        InputError: On invalid extents or counts
        ConfigurationError: On an unknown scenario
    """
    for name, side in (("height", height), ("width", width)):
        if side <= 0 or side % 16:
            raise InputError(name, f"must be a positive multiple of 16, got {side}")
    if not 1 <= n_objects <= 255:
        raise InputError("n_objects", f"must be in 1..255, got {n_objects}")
    if n_frames < 1:
        raise InputError("n_frames", f"must be >= 1, got {n_frames}")

    layout = ComponentRegistry.get_scenario(scenario)
    rng = seeded_rng(seed)
    noise = rng.integers(-TEXTURE_AMPLITUDE, TEXTURE_AMPLITUDE + 1, size=(height, width, 3))
    texture = np.clip(np.array(BACKGROUND) + noise, 0, 255).astype(np.uint8)
    for _ in range(MAX_LAYOUT_ATTEMPTS):
        shapes = layout.layout(rng, n_objects, n_frames, height, width)
        _, first = render(shapes, 1, height, width, texture)
        if np.isin(np.arange(1, n_objects + 1), first[0]).all():
            break
    else:
        raise InputError("n_objects", f"cannot show {n_objects} objects in {height}x{width}")
    frames, labels = render(shapes, n_frames, height, width, texture)

    logger.debug(f"Generated {scenario} video: {n_objects} objects, {n_frames} frames")
    return SyntheticVideo(frames=frames, labels=labels, shapes=shapes, scenario=scenario, seed=seed)
