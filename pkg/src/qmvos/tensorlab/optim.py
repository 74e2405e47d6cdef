"""
Named parameters and the AdamW update.
"""

from __future__ import annotations

from collections.abc import Iterator, Mapping

import numpy as np

from qmvos.core.exceptions import ContractError, ShapeError
from qmvos.tensorlab.tensor import Tape, Tensor


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=np.float64)
    out.setflags(write=False)
    return out


class ParamStore:
    """
    Immutable mapping of parameter name to array plus AdamW state.

    Moments have the shape of their parameter; the step count is shared.
    Updates return a new store.

    Example:
        >>> store = ParamStore.from_arrays({"w": np.zeros((2, 2))})
        >>> bound = store.bind(tape)
        >>> store = adamw_step(store, grads.for_params(bound), lr=1e-3)
    """

    __slots__ = ("_params", "_m", "_v", "_step")

    def __init__(
        self,
        params: Mapping[str, np.ndarray],
        m: Mapping[str, np.ndarray],
        v: Mapping[str, np.ndarray],
        step: int,
    ):
        self._params = dict(params)
        self._m = dict(m)
        self._v = dict(v)
        self._step = step

    @classmethod
    def from_arrays(cls, arrays: Mapping[str, np.ndarray]) -> ParamStore:
        params = {name: _frozen(a) for name, a in sorted(arrays.items())}
        zeros = {name: _frozen(np.zeros(a.shape)) for name, a in params.items()}
        return cls(params, zeros, dict(zeros), 0)

    @property
    def step(self) -> int:
        return self._step

    def names(self) -> list[str]:
        return list(self._params)

    def shapes(self) -> dict[str, tuple[int, ...]]:
        return {name: a.shape for name, a in self._params.items()}

    def __getitem__(self, name: str) -> np.ndarray:
        return self._params[name]

    def __contains__(self, name: object) -> bool:
        return name in self._params

    def __iter__(self) -> Iterator[str]:
        return iter(self._params)

    def __len__(self) -> int:
        return len(self._params)

    def moments(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        return self._m[name], self._v[name]

    def arrays(self) -> dict[str, np.ndarray]:
        return dict(self._params)

    def bind(self, tape: Tape | None = None) -> dict[str, Tensor]:
        """Expose parameters as tensors, watched on `tape` when given."""
        if tape is None:
            return {name: Tensor._wrap(a, None) for name, a in self._params.items()}
        return {name: tape.watch(a) for name, a in self._params.items()}

    def merged(self, other: ParamStore) -> ParamStore:
        """Union of two stores; names must not overlap."""
        overlap = set(self._params) & set(other._params)
        if overlap:
            raise ContractError("ParamStore.merged", f"duplicate parameters {sorted(overlap)}")
        return ParamStore(
            {**self._params, **other._params},
            {**self._m, **other._m},
            {**self._v, **other._v},
            max(self._step, other._step),
        )


def adamw_step(
    params: ParamStore,
    grads: Mapping[str, np.ndarray],
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
    weight_decay: float = 0.0,
) -> ParamStore:
    """
    One AdamW update with decoupled weight decay and bias-corrected moments.

    Parameters without a gradient entry are treated as having zero gradient.

    Raises:
        ShapeError: If a gradient's shape differs from its parameter
        ContractError: If a gradient names an unknown parameter
    """
    unknown = set(grads) - set(params._params)
    if unknown:
        raise ContractError("adamw_step", f"gradients for unknown parameters {sorted(unknown)}")

    step = params._step + 1
    correction1 = 1.0 - beta1**step
    correction2 = 1.0 - beta2**step

    new_p: dict[str, np.ndarray] = {}
    new_m: dict[str, np.ndarray] = {}
    new_v: dict[str, np.ndarray] = {}
    for name, p in params._params.items():
        g = grads.get(name)
        if g is None:
            g = np.zeros(p.shape)
        elif g.shape != p.shape:
            raise ShapeError("adamw_step", f"gradient {g.shape} for '{name}' of shape {p.shape}")
        m = beta1 * params._m[name] + (1.0 - beta1) * g
        v = beta2 * params._v[name] + (1.0 - beta2) * (g * g)
        update = (m / correction1) / (np.sqrt(v / correction2) + eps)
        new_p[name] = _frozen(p - lr * (weight_decay * p + update))
        new_m[name] = _frozen(m)
        new_v[name] = _frozen(v)
    return ParamStore(new_p, new_m, new_v, step)
