"""Parameter initialisers drawing from a caller-supplied generator."""

import math

import numpy as np


def seeded_rng(seed: int) -> np.random.Generator:
    """Philox counter-based generator; the stream is fixed for a given seed."""
    return np.random.Generator(np.random.Philox(seed))


def he_normal(
    rng: np.random.Generator, shape: tuple[int, ...], fan_in: int | None = None
) -> np.ndarray:
    """
    N(0, 2/fan_in) for weights feeding a ReLU.

    fan_in defaults to the product of all axes but the first, which matches
    the (out, in[, k, k]) convolution layout.
    """
    if fan_in is None:
        fan_in = math.prod(shape[1:]) if len(shape) > 1 else shape[0]
    return rng.standard_normal(shape) * math.sqrt(2.0 / fan_in)


def xavier_normal(rng: np.random.Generator, shape: tuple[int, int]) -> np.ndarray:
    return rng.standard_normal(shape) * math.sqrt(2.0 / (shape[0] + shape[1]))
