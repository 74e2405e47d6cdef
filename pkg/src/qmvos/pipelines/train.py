"""
Toy training loop.

Every video contributes one clip of `seq_len` consecutive frames, drawn once
from the seed. Each step samples a video, bootstraps on the first frame of its
clip, predicts the remaining frames with the full pipeline, and minimises the
mean per-pixel cross-entropy at stride 4 with AdamW.
"""

import logging
import math
from collections.abc import Callable, Sequence

import numpy as np

from qmvos.config.settings import RunConfig
from qmvos.core.exceptions import InputError, TrainingError
from qmvos.evalsynth.synthetic import SyntheticVideo, frame_to_tensor
from qmvos.pipelines.base import TrainResult
from qmvos.pipelines.model import init_model_weights
from qmvos.pipelines.segment import OUTPUT_STRIDE, SegmentationPipeline, one_hot
from qmvos.tensorlab import ops
from qmvos.tensorlab.optim import ParamStore, adamw_step
from qmvos.tensorlab.tensor import Tape, Tensor, backward

logger = logging.getLogger(__name__)

StepCallback = Callable[[int, float], None]


def pooled_targets(labels: np.ndarray, n_objects: int, stride: int = OUTPUT_STRIDE) -> np.ndarray:
    """Area-pooled one-hot targets (N+1, H/s, W/s); every pixel is a distribution."""
    hot = one_hot(labels, n_objects)
    c, h, w = hot.shape
    return hot.reshape(c, h // stride, stride, w // stride, stride).mean(axis=(2, 4))


def clip_loss(
    weights: ParamStore,
    frames: Sequence[Tensor],
    labels: np.ndarray,
    n_objects: int,
    cfg: RunConfig,
) -> tuple[Tape, dict[str, Tensor], Tensor]:
    """
    Forward one clip on a fresh tape.

    Returns:
        (tape, bound weights, scalar loss averaged over frames 1..L-1)
    """
    tape = Tape()
    bound = weights.bind(tape)
    pipeline = SegmentationPipeline(bound, cfg)
    masks = one_hot(labels[0], n_objects)[1:]
    state = pipeline.bootstrap(frames[0], masks)

    losses = []
    for t in range(1, len(frames)):
        out = pipeline.step(state, frames[t], propagate=t < len(frames) - 1)
        losses.append(ops.cross_entropy(out.logits, pooled_targets(labels[t], n_objects), axis=0))
    total = losses[0]
    for term in losses[1:]:
        total = ops.add(total, term)
    return tape, bound, ops.mul(total, 1.0 / len(losses))


def train_toy(
    dataset: Sequence[SyntheticVideo],
    cfg: RunConfig,
    weights: ParamStore | None = None,
    *,
    steps: int | None = None,
    lr: float | None = None,
    seq_len: int | None = None,
    on_step: StepCallback | None = None,
) -> TrainResult:
    """
    Train on synthetic videos.

    Args:
        dataset: Videos with ground-truth labels for every frame
        cfg: Run configuration (steps, lr, seq_len, weight decay, seed)
        weights: Starting weights (default: seeded initialisation)
        steps: Override cfg.steps
        lr: Override cfg.lr
        seq_len: Override cfg.seq_len
        on_step: Called with (step, loss) after every update

    Returns:
        TrainResult with final weights and the recorded loss curve

    Raises:
        InputError: If no video is long enough for one clip
        TrainingError: If the loss becomes non-finite
    """
    steps = cfg.steps if steps is None else steps
    lr = cfg.lr if lr is None else lr
    seq_len = cfg.seq_len if seq_len is None else seq_len
    if seq_len < 2:
        raise InputError("seq_len", f"must be >= 2, got {seq_len}")
    weights = weights if weights is not None else init_model_weights(cfg)
    result = TrainResult(weights=weights)
    if steps == 0:
        return result

    usable = []
    for i, video in enumerate(dataset):
        if video.n_frames < seq_len:
            logger.warning(f"⚠️  Skipping video {i}: {video.n_frames} < {seq_len} frames")
            result.skipped_videos.append(i)
        else:
            usable.append(video)
    if not usable:
        lengths = [v.n_frames for v in dataset]
        raise InputError("dataset", f"no video has {seq_len} frames (lengths {lengths})")

    tensors = [[frame_to_tensor(f) for f in v.frames] for v in usable]
    sampler = np.random.Generator(np.random.Philox(cfg.seed).jumped())
    # One clip per video, fixed for the whole run.
    starts = [int(sampler.integers(0, v.n_frames - seq_len + 1)) for v in usable]

    logger.info(f"🏋️ Training {steps} steps on {len(usable)} videos (lr={lr}, L={seq_len})")
    for step in range(1, steps + 1):
        idx = int(sampler.integers(len(usable)))
        video = usable[idx]
        clip = slice(starts[idx], starts[idx] + seq_len)

        tape, bound, loss = clip_loss(
            weights, tensors[idx][clip], video.labels[clip], video.n_objects, cfg
        )
        value = loss.item()
        if not math.isfinite(value):
            raise TrainingError(f"non-finite loss {value} at step {step}")

        grads = backward(tape, loss).for_params(bound)
        weights = adamw_step(weights, grads, lr, weight_decay=cfg.weight_decay)
        result.losses.append(value)
        if on_step is not None:
            on_step(step, value)
        if step % cfg.log_every == 0 or step == steps:
            logger.info(f"   step {step}/{steps}  loss={value:.4f}")

    result.weights = weights
    logger.info(f"✅ Training done: loss {result.initial_loss:.4f} -> {result.final_loss:.4f}")
    return result
