"""
Finite-difference gradient checking.

The tape gradient of a random projection <c, f(x)> is compared against a
five-point central difference. Components whose perturbation flips any ReLU
activation are skipped, since the derivative is not defined across a kink.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from qmvos.tensorlab.tensor import Tape, Tensor, backward
from qmvos.tensorlab import ops

logger = logging.getLogger(__name__)

DEFAULT_STEP = 1e-4


@dataclass(frozen=True)
class GradCheckResult:
    """Outcome of one gradient check."""

    max_rel_error: float
    n_components: int
    skipped_kinks: int

    def passed(self, threshold: float) -> bool:
        return self.max_rel_error < threshold


def _evaluate(
    f: Callable[[Tensor], Tensor], x: np.ndarray
) -> tuple[np.ndarray, tuple[np.ndarray, ...]]:
    tape = Tape()
    y = f(tape.watch(x))
    return y.data, tape.kink_signature()


def _same_signature(a: tuple[np.ndarray, ...], b: tuple[np.ndarray, ...]) -> bool:
    return len(a) == len(b) and all(np.array_equal(p, q) for p, q in zip(a, b, strict=True))


def check_gradients(
    f: Callable[[Tensor], Tensor],
    x: np.ndarray | Tensor,
    h: float = DEFAULT_STEP,
    seed: int = 0,
) -> GradCheckResult:
    """
    Compare tape gradients of `f` at `x` with finite differences.

    Args:
        f: Differentiable map built from tensorlab ops
        x: Point to check at
        h: Finite-difference step
        seed: Seed for the random output projection

    Returns:
        GradCheckResult with the max of |a-b| / max(1e-8, |a|+|b|); the error
        is inf when every component was skipped at a kink
    """
    x0 = np.array(x.data if isinstance(x, Tensor) else x, dtype=np.float64)

    tape = Tape()
    xt = tape.watch(x0)
    y = f(xt)
    rng = np.random.Generator(np.random.Philox(seed))
    cotangent = np.ones(y.shape) if y.size == 1 else rng.standard_normal(y.shape)
    loss = ops.sum(ops.mul(y, ops.constant(cotangent)))
    analytic = backward(tape, loss).of(xt).reshape(-1)
    base_signature = tape.kink_signature()

    worst = 0.0
    skipped = 0
    flat = x0.reshape(-1)
    for i in range(flat.size):
        outputs = []
        kinked = False
        for step in (2 * h, h, -h, -2 * h):
            xp = flat.copy()
            xp[i] += step
            out, signature = _evaluate(f, xp.reshape(x0.shape))
            if not _same_signature(signature, base_signature):
                kinked = True
                break
            outputs.append(out)
        if kinked:
            skipped += 1
            continue
        y2, y1, ym1, ym2 = outputs
        # Paired differences: an input the output ignores gives exactly 0.
        stencil = 8.0 * (y1 - ym1) - (y2 - ym2)
        numeric = float(np.sum(cotangent * stencil)) / (12.0 * h)
        a = float(analytic[i])
        rel = abs(a - numeric) / max(1e-8, abs(a) + abs(numeric))
        worst = max(worst, rel)

    if skipped:
        logger.debug(f"Skipped {skipped}/{flat.size} components at ReLU kinks")
    if flat.size and skipped == flat.size:
        logger.warning(f"⚠️  All {flat.size} components sit at ReLU kinks; nothing was checked")
        worst = math.inf
    return GradCheckResult(max_rel_error=worst, n_components=flat.size, skipped_kinks=skipped)


def grad_check(
    f: Callable[[Tensor], Tensor],
    x: np.ndarray | Tensor,
    h: float = DEFAULT_STEP,
    seed: int = 0,
) -> float:
    """Max relative error between tape and finite-difference gradients."""
    return check_gradients(f, x, h, seed).max_rel_error
