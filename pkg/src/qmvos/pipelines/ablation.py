"""
Ablation runner.

Every arm is trained and evaluated under the toy protocol: one synthetic
video per seed, `steps` AdamW updates, then segmentation of the same video
from its first-frame annotation and J&F against its ground truth.
"""

import logging
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from qmvos.config.settings import RunConfig
from qmvos.evalsynth.metrics import evaluate_sequence
from qmvos.evalsynth.synthetic import gen_synthetic
from qmvos.pipelines.base import TrainResult
from qmvos.pipelines.model import init_model_weights
from qmvos.pipelines.segment import segment_video
from qmvos.pipelines.train import train_toy
from qmvos.presets.ablation import AblationPreset, get_preset

logger = logging.getLogger(__name__)

ArmCallback = Callable[[str, int, float], None]


@dataclass
class ArmResult:
    """Scores of one preset over the seeds."""

    preset: str
    seeds: list[int] = field(default_factory=list)
    j_and_f: list[float] = field(default_factory=list)
    initial_losses: list[float] = field(default_factory=list)
    final_losses: list[float] = field(default_factory=list)

    @property
    def mean_j_and_f(self) -> float:
        return float(np.mean(self.j_and_f)) if self.j_and_f else float("nan")

    def to_dict(self) -> dict[str, Any]:
        return {
            "preset": self.preset,
            "seeds": self.seeds,
            "j_and_f": self.j_and_f,
            "mean_j_and_f": self.mean_j_and_f,
            "initial_losses": self.initial_losses,
            "final_losses": self.final_losses,
        }


@dataclass(frozen=True)
class ToyProtocol:
    """Synthetic video and training budget for one ablation arm."""

    n_objects: int = 2
    n_frames: int = 16
    height: int = 64
    width: int = 64
    scenario: str = "similar"
    steps: int = 1000


def run_arm(
    preset: AblationPreset, seed: int, base: RunConfig, protocol: ToyProtocol
) -> tuple[float, TrainResult]:
    """Train and score one (preset, seed)."""
    cfg = preset.apply(base).model_copy(update={"seed": seed})
    p = protocol
    video = gen_synthetic(seed, p.n_objects, p.n_frames, p.height, p.width, p.scenario)
    trained = train_toy([video], cfg, init_model_weights(cfg), steps=protocol.steps)
    seg = segment_video(video.frames, video.labels[0], trained.weights, cfg)
    report = evaluate_sequence(seg.labels, list(video.labels), video.n_objects)
    return report.j_and_f, trained


def run_ablation(
    presets: Sequence[str | AblationPreset],
    seeds: Iterable[int] = (0, 1, 2),
    base: RunConfig | None = None,
    protocol: ToyProtocol | None = None,
    on_arm: ArmCallback | None = None,
) -> list[ArmResult]:
    """
    Train and evaluate each preset on each seed.

    Args:
        presets: Preset names or instances
        seeds: Seeds for data, initialisation and clip sampling
        base: Config the presets are applied to (default RunConfig())
        protocol: Toy protocol (default: 2 objects, 16 frames, 64x64, similar, 1000 steps)
        on_arm: Called with (preset, seed, J&F) after each arm

    Returns:
        One ArmResult per preset, in the given order
    """
    base = base or RunConfig()
    protocol = protocol or ToyProtocol()
    seeds = list(seeds)
    resolved = [p if isinstance(p, AblationPreset) else get_preset(p) for p in presets]

    logger.info(
        f"🧪 Ablation: {len(resolved)} presets x {len(seeds)} seeds "
        f"({protocol.scenario}, {protocol.steps} steps)"
    )
    results = []
    for preset in resolved:
        arm = ArmResult(preset=preset.name)
        for seed in seeds:
            score, trained = run_arm(preset, seed, base, protocol)
            arm.seeds.append(seed)
            arm.j_and_f.append(score)
            arm.initial_losses.append(trained.initial_loss)
            arm.final_losses.append(trained.final_loss)
            if trained.losses and not trained.final_loss < trained.initial_loss:
                logger.warning(
                    f"⚠️  {preset.name} seed {seed}: loss did not decrease "
                    f"({trained.initial_loss:.4f} -> {trained.final_loss:.4f})"
                )
            if on_arm is not None:
                on_arm(preset.name, seed, score)
        logger.info(f"   {preset.name}: mean J&F {arm.mean_j_and_f:.4f}")
        results.append(arm)
    return results
