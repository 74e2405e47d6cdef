"""
Gradient-check suite over the differentiable building blocks.

Each block is checked on several seeded random instances with respect to
every tensor input; the reported error is the worst over instances and
inputs. Widths are kept small so the whole suite finishes in seconds; the
ablation switches of the given config (heads, scaling, interaction, fusion
scales) are honoured.
"""

import logging
from collections.abc import Callable, Iterable
from dataclasses import dataclass

import numpy as np

from qmvos.config.settings import RunConfig
from qmvos.querymod.qcim import qcim_block
from qmvos.querymod.sim import fuse_scales, init_queries, sim_block
from qmvos.querymod.weights import init_querymod_weights
from qmvos.segnet.decoder import DecoderFeature
from qmvos.segnet.head import predict_masks
from qmvos.segnet.weights import init_net_weights
from qmvos.tensorlab import ops
from qmvos.tensorlab.gradcheck import DEFAULT_STEP, check_gradients
from qmvos.tensorlab.init import seeded_rng
from qmvos.tensorlab.tensor import Tensor

logger = logging.getLogger(__name__)

GRADCHECK_THRESHOLD = 1e-5

# Compact widths for the composed blocks.
SUITE_WIDTHS = {
    "key_dim": 4,
    "value_dim": 8,
    "decoder_dim": 6,
    "c4": 4,
    "c8": 6,
    "c16": 8,
    "ffn_hidden": 12,
}

Check = Callable[[np.random.Generator, RunConfig, int], float]


@dataclass(frozen=True)
class BlockResult:
    """Worst relative error of one block over all seeds."""

    name: str
    max_rel_error: float
    instances: int

    def passed(self, threshold: float = GRADCHECK_THRESHOLD) -> bool:
        return self.max_rel_error < threshold


def suite_config(cfg: RunConfig) -> RunConfig:
    """cfg with compact widths; heads fall back to 1 if they no longer divide C^v."""
    update: dict[str, object] = dict(SUITE_WIDTHS)
    if SUITE_WIDTHS["value_dim"] % cfg.heads:
        update["heads"] = 1
    return cfg.model_copy(update=update)


def _worst(seed: int, *checks: tuple[Callable[[Tensor], Tensor], np.ndarray]) -> float:
    return max(check_gradients(f, x, DEFAULT_STEP, seed).max_rel_error for f, x in checks)


def _check_linear(rng: np.random.Generator, cfg: RunConfig, seed: int) -> float:
    x, w, b = rng.standard_normal((4, 5)), rng.standard_normal((5, 3)), rng.standard_normal(3)
    return _worst(
        seed,
        (lambda t: ops.linear(t, Tensor(w), Tensor(b)), x),
        (lambda t: ops.linear(Tensor(x), t, Tensor(b)), w),
        (lambda t: ops.linear(Tensor(x), Tensor(w), t), b),
    )


def _check_conv1x1(rng: np.random.Generator, cfg: RunConfig, seed: int) -> float:
    x, w, b = rng.standard_normal((3, 4, 4)), rng.standard_normal((2, 3)), rng.standard_normal(2)
    return _worst(
        seed,
        (lambda t: ops.conv1x1(t, Tensor(w), Tensor(b)), x),
        (lambda t: ops.conv1x1(Tensor(x), t, Tensor(b)), w),
    )


def _check_layer_norm(rng: np.random.Generator, cfg: RunConfig, seed: int) -> float:
    x = rng.standard_normal((3, 6))
    g, b = rng.standard_normal(6), rng.standard_normal(6)
    return _worst(
        seed,
        (lambda t: ops.layer_norm(t, Tensor(g), Tensor(b)), x),
        (lambda t: ops.layer_norm(Tensor(x), t, Tensor(b)), g),
    )


def _check_softmax(rng: np.random.Generator, cfg: RunConfig, seed: int) -> float:
    x = rng.standard_normal((3, 5))
    rows, cols = (lambda t: ops.softmax(t, axis=1)), (lambda t: ops.softmax(t, axis=0))
    return _worst(seed, (rows, x), (cols, x))


def _check_attention(rng: np.random.Generator, cfg: RunConfig, seed: int) -> float:
    q, k, v = rng.standard_normal((3, 4)), rng.standard_normal((5, 4)), rng.standard_normal((5, 3))
    scaled = cfg.cross_attention_scaling
    return _worst(
        seed,
        (lambda t: ops.scaled_dot_attention(t, Tensor(k), Tensor(v), scaled), q),
        (lambda t: ops.scaled_dot_attention(Tensor(q), t, Tensor(v), scaled), k),
        (lambda t: ops.scaled_dot_attention(Tensor(q), Tensor(k), t, scaled), v),
    )


def _check_attention_layer(rng: np.random.Generator, cfg: RunConfig, seed: int) -> float:
    shapes = ((3, 4), (5, 6), (4, 2), (6, 2), (6, 3))
    args = [rng.standard_normal(s) for s in shapes]
    scaled = cfg.cross_attention_scaling

    def through(position: int) -> Callable[[Tensor], Tensor]:
        def f(t: Tensor) -> Tensor:
            inputs = [t if i == position else Tensor(a) for i, a in enumerate(args)]
            return ops.attention_layer(*inputs, scale_by_sqrt_d=scaled)

        return f

    return _worst(seed, *((through(i), a) for i, a in enumerate(args)))


def _check_residual_layer_norm(rng: np.random.Generator, cfg: RunConfig, seed: int) -> float:
    x, r = rng.standard_normal((3, 6)), rng.standard_normal((3, 6))
    g, b = Tensor(rng.standard_normal(6)), Tensor(rng.standard_normal(6))
    return _worst(
        seed,
        (lambda t: ops.residual_layer_norm(t, Tensor(r), g, b), x),
        (lambda t: ops.residual_layer_norm(Tensor(x), t, g, b), r),
    )


def _check_ffn(rng: np.random.Generator, cfg: RunConfig, seed: int) -> float:
    x = rng.standard_normal((3, 4))
    w1, b1 = rng.standard_normal((4, 6)), rng.standard_normal(6)
    # Every hidden unit is active on at least one row.
    b1 += np.maximum(0.0, 0.5 - (x @ w1 + b1).max(axis=0))
    w2, b2 = rng.standard_normal((6, 4)), rng.standard_normal(4)
    params = [Tensor(a) for a in (w1, b1, w2, b2)]
    return _worst(
        seed,
        (lambda t: ops.ffn(t, *params), x),
        (lambda t: ops.ffn(Tensor(x), t, *params[1:]), w1),
    )


def _bound_querymod(rng: np.random.Generator, cfg: RunConfig) -> dict[str, Tensor]:
    return init_querymod_weights(cfg, rng).bind()


def _check_sim_block(rng: np.random.Generator, cfg: RunConfig, seed: int) -> float:
    w = _bound_querymod(rng, cfg)
    x = rng.standard_normal((3, cfg.value_dim))
    return _worst(
        seed, (lambda t: sim_block(t, w, "sim.block0", cfg.heads, cfg.sim_interaction), x)
    )


def _check_qcim_block(rng: np.random.Generator, cfg: RunConfig, seed: int) -> float:
    w = _bound_querymod(rng, cfg)
    x = rng.standard_normal((3, cfg.value_dim))
    content = rng.standard_normal((12, cfg.value_dim))
    scaled = cfg.cross_attention_scaling
    return _worst(
        seed,
        (lambda t: qcim_block(t, Tensor(content), w, "qcim.block0", cfg.heads, scaled), x),
        (lambda t: qcim_block(Tensor(x), t, w, "qcim.block0", cfg.heads, scaled), content),
    )


def _check_query_init(rng: np.random.Generator, cfg: RunConfig, seed: int) -> float:
    w = _bound_querymod(rng, cfg)
    f16 = rng.standard_normal((cfg.c16, 2, 2))
    f8 = rng.standard_normal((cfg.c8, 4, 4))
    f4 = rng.standard_normal((cfg.c4, 8, 8))
    masks = rng.uniform(0.0, 1.0, size=(2, 16, 16))

    def through_f16(t: Tensor) -> Tensor:
        fused = fuse_scales(t, Tensor(f8), w, f4=Tensor(f4), init_scales=cfg.init_scales)
        return init_queries(fused, masks).q

    def through_f8(t: Tensor) -> Tensor:
        fused = fuse_scales(Tensor(f16), t, w, f4=Tensor(f4), init_scales=cfg.init_scales)
        return init_queries(fused, masks).q

    def through_masks(t: Tensor) -> Tensor:
        fused = fuse_scales(Tensor(f16), Tensor(f8), w, f4=Tensor(f4), init_scales=cfg.init_scales)
        return init_queries(fused, t).q

    checks = [(through_masks, masks)]
    if cfg.init_scales != "f8":
        checks.append((through_f16, f16))
    if cfg.init_scales != "f16":
        checks.append((through_f8, f8))
    return _worst(seed, *checks)


def _check_predict_masks(rng: np.random.Generator, cfg: RunConfig, seed: int) -> float:
    w = init_net_weights(cfg, rng).bind()
    n = 2
    feats = [
        DecoderFeature(d=Tensor(rng.standard_normal((cfg.decoder_dim, 4, 4)))) for _ in range(n)
    ]
    queries = rng.standard_normal((n, cfg.value_dim))
    return _worst(seed, (lambda t: predict_masks(feats, t, w), queries))


SUITE: dict[str, Check] = {
    "linear": _check_linear,
    "conv1x1": _check_conv1x1,
    "layer_norm": _check_layer_norm,
    "softmax": _check_softmax,
    "scaled_dot_attention": _check_attention,
    "attention_layer": _check_attention_layer,
    "residual_layer_norm": _check_residual_layer_norm,
    "ffn": _check_ffn,
    "sim_block": _check_sim_block,
    "qcim_block": _check_qcim_block,
    "fuse_scales+init_queries": _check_query_init,
    "predict_masks": _check_predict_masks,
}


def run_gradcheck_suite(
    cfg: RunConfig | None = None,
    seeds: Iterable[int] = range(10),
    blocks: Iterable[str] | None = None,
) -> list[BlockResult]:
    """
    Gradient-check every block on every seed.

    Args:
        cfg: Config whose switches are honoured (widths are replaced)
        seeds: Instance seeds
        blocks: Subset of SUITE names (default: all)

    Returns:
        One BlockResult per block, in suite order
    """
    cfg = suite_config(cfg or RunConfig())
    seeds = list(seeds)
    names = list(blocks) if blocks is not None else list(SUITE)
    results = []
    for name in names:
        check = SUITE[name]
        worst = max(check(seeded_rng(seed), cfg, seed) for seed in seeds)
        results.append(BlockResult(name=name, max_rel_error=worst, instances=len(seeds)))
        logger.debug(f"gradcheck {name}: {worst:.3e}")
    return results
