"""
Dense tensors and the reverse-mode tape.

A Tensor is an immutable float64 array. Tensors derived from a watched tensor
carry a reference to the Tape that recorded them; there is no global recording
state, so independent tapes can coexist.

Example:
    >>> tape = Tape()
    >>> x = tape.watch(np.ones((2, 3)))
    >>> loss = ops.sum(x)
    >>> backward(tape, loss).of(x)
    array([[1., 1., 1.],
           [1., 1., 1.]])
"""

from __future__ import annotations

from collections.abc import Callable, Mapping
from dataclasses import dataclass
from typing import Any

import numpy as np

from qmvos.core.exceptions import ContractError

Vjp = Callable[[np.ndarray], tuple[np.ndarray | None, ...]]


class Tensor:
    """Immutable dense float64 array, optionally attached to a Tape."""

    __slots__ = ("_data", "_tape")

    def __init__(self, data: Any, tape: Tape | None = None):
        arr = np.array(data, dtype=np.float64)
        arr.setflags(write=False)
        self._data = arr
        self._tape = tape

    @classmethod
    def _wrap(cls, arr: np.ndarray, tape: Tape | None) -> Tensor:
        """Adopt an array without copying. The array must not be mutated afterwards."""
        obj = cls.__new__(cls)
        if arr.dtype != np.float64:
            arr = arr.astype(np.float64)
        arr.setflags(write=False)
        obj._data = arr
        obj._tape = tape
        return obj

    @property
    def data(self) -> np.ndarray:
        """Read-only view of the values."""
        return self._data

    @property
    def tape(self) -> Tape | None:
        return self._tape

    @property
    def shape(self) -> tuple[int, ...]:
        return self._data.shape

    @property
    def ndim(self) -> int:
        return self._data.ndim

    @property
    def size(self) -> int:
        return self._data.size

    def numpy(self) -> np.ndarray:
        """Writable copy of the values."""
        return self._data.copy()

    def item(self) -> float:
        if self._data.size != 1:
            raise ContractError("item", f"expected a single value, got shape {self.shape}")
        return float(self._data.reshape(-1)[0])

    def detach(self) -> Tensor:
        """Same values, cut from any tape."""
        return Tensor._wrap(self._data, None)

    def __repr__(self) -> str:
        tracked = ", tracked" if self._tape is not None else ""
        return f"Tensor(shape={self.shape}{tracked})"


@dataclass(frozen=True)
class TapeEntry:
    """One recorded operation."""

    op: str
    inputs: tuple[Tensor, ...]
    output: Tensor
    vjp: Vjp
    # Activation pattern of a piecewise-linear op; grad_check compares these.
    kinks: np.ndarray | None = None


class Tape:
    """
    Ordered record of differentiable operations.

    Entries are appended in execution order, so reversed order is a valid
    reverse topological order.
    """

    def __init__(self) -> None:
        self._entries: list[TapeEntry] = []
        self._leaves: list[Tensor] = []

    def watch(self, value: Tensor | np.ndarray | float) -> Tensor:
        """Register a leaf whose gradient should be tracked."""
        if isinstance(value, Tensor):
            arr = value.data
        else:
            arr = np.array(value, dtype=np.float64)
        leaf = Tensor._wrap(arr, self)
        self._leaves.append(leaf)
        return leaf

    def record(
        self,
        op: str,
        inputs: tuple[Tensor, ...],
        output: Tensor,
        vjp: Vjp,
        kinks: np.ndarray | None = None,
    ) -> None:
        self._entries.append(TapeEntry(op, inputs, output, vjp, kinks))

    @property
    def entries(self) -> tuple[TapeEntry, ...]:
        return tuple(self._entries)

    def kink_signature(self) -> tuple[np.ndarray, ...]:
        """Activation patterns of every recorded piecewise-linear op, in record order."""
        return tuple(e.kinks for e in self._entries if e.kinks is not None)

    def __len__(self) -> int:
        return len(self._entries)


class Gradients:
    """Gradient accumulators keyed by tensor identity."""

    def __init__(self, tape: Tape | None, grads: dict[int, np.ndarray]):
        # Holding the tape keeps every keyed tensor alive, so ids stay unique.
        self._tape = tape
        self._grads = grads

    def of(self, tensor: Tensor) -> np.ndarray:
        """Gradient of the loss w.r.t. `tensor`; exactly zero if it did not contribute."""
        grad = self._grads.get(id(tensor))
        if grad is None:
            return np.zeros(tensor.shape)
        return grad

    def for_params(self, bound: Mapping[str, Tensor]) -> dict[str, np.ndarray]:
        """Gradients for a name -> tensor mapping produced by ParamStore.bind."""
        return {name: self.of(t) for name, t in bound.items()}


def backward(tape: Tape, loss: Tensor) -> Gradients:
    """
    Replay the tape in reverse and accumulate gradients of a scalar loss.

    Args:
        tape: Tape the loss was recorded on
        loss: Scalar tensor (size 1)

    Returns:
        Gradients for every tensor on the tape

    Raises:
        ContractError: If the loss is not scalar or belongs to another tape
    """
    if loss.size != 1:
        raise ContractError("backward", f"loss must be scalar, got shape {loss.shape}")
    if loss.tape is None:
        return Gradients(tape, {})
    if loss.tape is not tape:
        raise ContractError("backward", "loss was recorded on a different tape")

    grads: dict[int, np.ndarray] = {id(loss): np.ones(loss.shape)}
    for entry in reversed(tape._entries):
        g = grads.get(id(entry.output))
        if g is None:
            continue
        for tensor, grad in zip(entry.inputs, entry.vjp(g), strict=True):
            if grad is None or tensor.tape is not tape:
                continue
            key = id(tensor)
            existing = grads.get(key)
            grads[key] = grad if existing is None else existing + grad
    return Gradients(tape, grads)
