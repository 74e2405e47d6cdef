"""
Sequential video segmentation.

Frame 0 is bootstrapped from the annotation: its key and per-object values
enter memory and its masks initialise the object queries. Every later frame
runs encode -> readout -> QCIM -> decode -> head -> softmax -> upsample,
is memorised when t % r == 0, and re-initialises the queries through SIM from
its own predicted soft masks.
"""

import logging
from collections.abc import Sequence
from contextlib import AbstractContextManager, nullcontext
from dataclasses import dataclass

import numpy as np

from qmvos.config.settings import RunConfig
from qmvos.core.exceptions import InputError
from qmvos.evalsynth.synthetic import frame_to_tensor
from qmvos.membank.bank import MemoryBank, should_memorize
from qmvos.pipelines.base import SegResult, StageTimer, VideoState
from qmvos.querymod.qcim import project_f16, qcim_refine
from qmvos.querymod.sim import fuse_scales, init_queries, sim_interact
from qmvos.querymod.types import ObjectQuerySet
from qmvos.segnet.decoder import decode
from qmvos.segnet.encoder import FeaturePyramid, encode_frame, encode_mask, project_key
from qmvos.segnet.head import apply_filters, mask_probabilities, predict_static, project_queries
from qmvos.segnet.weights import Weights
from qmvos.tensorlab import ops
from qmvos.tensorlab.optim import ParamStore
from qmvos.tensorlab.tensor import Tensor

logger = logging.getLogger(__name__)

# Decoder output stride relative to the input frame.
OUTPUT_STRIDE = 4


@dataclass(frozen=True)
class FrameOutput:
    """Stride-4 logits and full-resolution probabilities of one frame."""

    logits: Tensor
    probabilities: Tensor

    def labels(self) -> np.ndarray:
        return np.argmax(self.probabilities.data, axis=0).astype(np.uint8)


def one_hot(labels: np.ndarray, n_objects: int) -> np.ndarray:
    """(H, W) labels -> (N+1, H, W) float one-hot, background first."""
    return (labels[None, :, :] == np.arange(n_objects + 1)[:, None, None]).astype(np.float64)


def validate_first_mask(first_mask: np.ndarray, height: int, width: int) -> int:
    """
    Check an annotation and return its object count N.

    Raises:
        InputError: On a shape mismatch, no objects, or a missing label in 1..N
    """
    if first_mask.shape != (height, width):
        raise InputError("first_mask", f"shape {first_mask.shape} != frame {(height, width)}")
    if first_mask.size == 0 or first_mask.min() < 0:
        raise InputError("first_mask", "labels must be non-negative")
    n = int(first_mask.max())
    if n == 0:
        raise InputError("first_mask", "references zero objects")
    missing = sorted(set(range(1, n + 1)) - set(np.unique(first_mask).tolist()))
    if missing:
        raise InputError("first_mask", f"object labels {missing} are absent")
    return n


class SegmentationPipeline:
    """
    Frame-by-frame segmentation with memory readout and object queries.

    Works on bound weights, so the same code serves inference (plain tensors)
    and training (tensors watched on a tape).

    Example:
        >>> pipeline = SegmentationPipeline(weights.bind(), cfg)
        >>> state = pipeline.bootstrap(frames[0], masks)
        >>> out = pipeline.step(state, frames[1])
    """

    def __init__(self, w: Weights, cfg: RunConfig, timer: StageTimer | None = None):
        self.w = w
        self.cfg = cfg
        self.timer = timer

    def _stage(self, name: str) -> AbstractContextManager[None]:
        return self.timer.stage(name) if self.timer else nullcontext()

    def memorize(self, state: VideoState, image: Tensor, key: Tensor, masks: Tensor) -> None:
        """Insert the frame's key and one value slab per object."""
        values = [
            encode_mask(image, ops.index(masks, (slice(n, n + 1),)), self.w)
            for n in range(state.n_objects)
        ]
        state.bank.insert(key, ops.stack(values, axis=0), state.t)
        logger.debug(f"🧠 Memorised frame {state.t} (T={state.bank.size})")

    def make_queries(self, pyr: FeaturePyramid, soft_masks: Tensor | np.ndarray) -> ObjectQuerySet:
        """fuse_scales -> init_queries -> sim_interact."""
        cfg = self.cfg
        f_fuse = fuse_scales(pyr.f16, pyr.f8, self.w, f4=pyr.f4, init_scales=cfg.init_scales)
        x = init_queries(f_fuse, soft_masks)
        return sim_interact(
            x, self.w, blocks=cfg.sim_blocks, heads=cfg.heads, interaction=cfg.sim_interaction
        )

    def propagate_queries(
        self, state: VideoState, pyr: FeaturePyramid, soft_masks: Tensor | np.ndarray
    ) -> ObjectQuerySet:
        """Replace the state's queries with ones built from this frame."""
        with self._stage("sim"):
            state.queries = self.make_queries(pyr, soft_masks)
        return state.queries

    def bootstrap(self, image: Tensor, masks: np.ndarray) -> VideoState:
        """
        Initialise memory and queries from an annotated frame.

        Args:
            image: (3, H, W) first frame
            masks: (N, H, W) object masks (one-hot or soft)
        """
        cfg = self.cfg
        n = masks.shape[0]
        pyr = encode_frame(image, self.w)
        key = project_key(pyr.f16, self.w)
        bank = MemoryBank(cfg.key_dim, cfg.value_dim, n, cfg.mem_interval, cfg.affinity)
        placeholder = ObjectQuerySet(
            q=Tensor(np.zeros((n, cfg.value_dim))),
            empty_flags=tuple(bool(m.sum() == 0) for m in masks),
        )
        state = VideoState(t=0, bank=bank, queries=placeholder, n_objects=n, cfg=cfg)
        self.memorize(state, image, key, ops.constant(masks))
        if cfg.querymod_enabled:
            state.queries = self.make_queries(pyr, masks)
        return state

    def step(self, state: VideoState, image: Tensor, *, propagate: bool = True) -> FrameOutput:
        """
        Segment the next frame and advance the state.

        `propagate=False` skips building queries for a frame that will not come
        (the last one of a video or clip).
        """
        cfg = self.cfg
        state.t += 1

        with self._stage("encode"):
            pyr = encode_frame(image, self.w)
            key = project_key(pyr.f16, self.w)
        with self._stage("readout"):
            readout = state.bank.readout(key)

        if cfg.querymod_enabled:
            with self._stage("qcim"):
                content = readout if cfg.cross_source == "readout" else project_f16(pyr.f16, self.w)
                refined = qcim_refine(
                    state.queries,
                    content,
                    self.w,
                    blocks=cfg.qcim_blocks,
                    heads=cfg.heads,
                    scaled=cfg.cross_attention_scaling,
                )

        with self._stage("decode"):
            feats = [
                decode(ops.index(readout, n), pyr, self.w) for n in range(state.n_objects)
            ]

        if cfg.querymod_enabled:
            with self._stage("project"):
                filters = project_queries(refined, self.w)
            with self._stage("head"):
                logits = apply_filters(feats, filters)
        else:
            with self._stage("head"):
                logits = predict_static(feats, self.w)

        with self._stage("upsample"):
            probs = ops.upsample_bilinear(mask_probabilities(logits), OUTPUT_STRIDE)
            soft_masks = ops.index(probs, (slice(1, None),))

        if should_memorize(state.t, cfg.mem_interval):
            with self._stage("memorize"):
                self.memorize(state, image, key, soft_masks)

        if propagate and cfg.querymod_enabled and cfg.query_propagation == "propagate":
            self.propagate_queries(state, pyr, soft_masks)

        return FrameOutput(logits=logits, probabilities=probs)


def _as_tensors(frames: Sequence[Tensor] | np.ndarray) -> list[Tensor]:
    if isinstance(frames, np.ndarray):
        if frames.ndim != 4 or frames.shape[3] != 3:
            raise InputError("frames", f"expected (T, H, W, 3) pixels, got {frames.shape}")
        return [frame_to_tensor(f) for f in frames]
    return list(frames)


def segment_video(
    frames: Sequence[Tensor] | np.ndarray,
    first_mask: np.ndarray,
    weights: ParamStore,
    cfg: RunConfig,
    timer: StageTimer | None = None,
) -> SegResult:
    """
    Segment a video given the first frame's annotation.

    Args:
        frames: (3, H, W) tensors in [0, 1], or a (T, H, W, 3) uint8 array
        first_mask: (H, W) labels 0..N with every object 1..N present
        weights: Model weights
        cfg: Run configuration
        timer: Optional stage timer (frames 1..T-1 only)

    Returns:
        SegResult whose frame 0 equals `first_mask`
    """
    images = _as_tensors(frames)
    if not images:
        raise InputError("frames", "need at least one frame")
    h, w = images[0].shape[1:]
    n = validate_first_mask(first_mask, h, w)

    timer = timer or StageTimer()
    pipeline = SegmentationPipeline(weights.bind(), cfg, timer)
    masks = one_hot(first_mask, n)

    logger.info(f"🎞️  Segmenting {len(images)} frames, {n} objects ({h}x{w})")
    state = pipeline.bootstrap(images[0], masks[1:])
    result = SegResult(labels=[first_mask.astype(np.uint8)], probabilities=[masks])

    last = len(images) - 1
    for t in range(1, len(images)):
        out = pipeline.step(state, images[t], propagate=t < last)
        result.labels.append(out.labels())
        result.probabilities.append(out.probabilities.numpy())

    result.timings = dict(timer.totals)
    result.memorized_frames = [t for t in state.bank.frame_indices if t is not None]
    logger.info(f"✅ Segmented {len(images)} frames, memorised {result.memorized_frames}")
    return result


def propagate_queries(
    state: VideoState, pyr: FeaturePyramid, soft_masks: Tensor | np.ndarray, w: Weights
) -> ObjectQuerySet:
    """Re-initialise `state.queries` from a frame's pyramid and soft masks."""
    return SegmentationPipeline(w, state.cfg).propagate_queries(state, pyr, soft_masks)
