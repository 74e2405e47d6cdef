"""
Spatio-temporal memory bank.

Keys are (C^k, H, W) maps, values are (N, C^v, H, W) per-object slabs, one
pair per memorised frame. Readout attends from every query pixel to every
memory pixel of every stored frame.
"""

from __future__ import annotations

import logging

from qmvos.core.exceptions import ConfigurationError, PreconditionError, ShapeError
from qmvos.core.registry import ComponentRegistry
from qmvos.membank.affinity import affinity_from_logits
from qmvos.tensorlab import ops
from qmvos.tensorlab.tensor import Tensor

logger = logging.getLogger(__name__)


def should_memorize(frame_idx: int, r: int) -> bool:
    """
    True iff `frame_idx` is a memorisation frame for interval `r`.

    Raises:
        ConfigurationError: If r < 1
    """
    if r <= 0:
        raise ConfigurationError("mem_interval", f"must be >= 1, got {r}")
    if frame_idx < 0:
        raise ConfigurationError("frame_idx", f"must be >= 0, got {frame_idx}")
    return frame_idx % r == 0


class MemoryBank:
    """
    Key/value store for memorised frames.

    Example:
        >>> bank = MemoryBank(key_dim=32, value_dim=64, n_objects=2, interval=5)
        >>> bank.insert(key, values)
        >>> readout = bank.readout(query_key)  # (2, 64, h, w)
    """

    def __init__(
        self,
        key_dim: int,
        value_dim: int,
        n_objects: int,
        interval: int = 5,
        affinity: str = "dot",
    ):
        if interval < 1:
            raise ConfigurationError("mem_interval", f"must be >= 1, got {interval}")
        if n_objects < 1:
            raise ConfigurationError("n_objects", f"must be >= 1, got {n_objects}")
        self.key_dim = key_dim
        self.value_dim = value_dim
        self.n_objects = n_objects
        self.interval = interval
        self.kernel = ComponentRegistry.get_affinity(affinity)
        self.keys: list[Tensor] = []
        self.values: list[Tensor] = []
        self.frame_indices: list[int | None] = []
        self._extent: tuple[int, int] | None = None

    @property
    def size(self) -> int:
        """Number of memorised frames T."""
        return len(self.keys)

    def __len__(self) -> int:
        return len(self.keys)

    def insert(self, key: Tensor, values: Tensor, frame_idx: int | None = None) -> MemoryBank:
        """
        Append one memorised frame.

        Args:
            key: (C^k, H, W)
            values: (N, C^v, H, W)
            frame_idx: Source frame index, kept for bookkeeping

        Returns:
            This bank
        """
        if key.ndim != 3 or key.shape[0] != self.key_dim:
            raise ShapeError("memory.insert", f"key {key.shape} needs {self.key_dim} channels")
        expected = (self.n_objects, self.value_dim) + key.shape[1:]
        if values.shape != expected:
            raise ShapeError("memory.insert", f"values {values.shape}, expected {expected}")
        extent = (key.shape[1], key.shape[2])
        if self._extent is not None and extent != self._extent:
            raise ShapeError("memory.insert", f"extent {extent} differs from stored {self._extent}")

        self._extent = extent
        self.keys.append(key)
        self.values.append(values)
        self.frame_indices.append(frame_idx)
        logger.debug(f"Memorised frame {frame_idx} (T={self.size})")
        return self

    def _query_rows(self, query_key: Tensor) -> Tensor:
        if self.size == 0:
            raise PreconditionError("memory.readout", "memory bank is empty")
        if query_key.ndim != 3 or query_key.shape[0] != self.key_dim:
            raise ShapeError("memory.readout", f"query key {query_key.shape} has wrong channels")
        if (query_key.shape[1], query_key.shape[2]) != self._extent:
            raise ShapeError(
                "memory.readout", f"query extent {query_key.shape[1:]} != stored {self._extent}"
            )
        c, h, w = query_key.shape
        return ops.transpose(ops.reshape(query_key, (c, h * w)))

    def _memory_keys(self) -> Tensor:
        h, w = self._extent  # type: ignore[misc]
        return ops.concat([ops.reshape(k, (self.key_dim, h * w)) for k in self.keys], axis=1)

    def affinity(self, query_key: Tensor) -> Tensor:
        """(HW, T*HW) matrix whose rows are softmax distributions over memory pixels."""
        rows = self._query_rows(query_key)
        return affinity_from_logits(self.kernel.logits(rows, self._memory_keys()))

    def readout(self, query_key: Tensor) -> Tensor:
        """
        Affinity-weighted memory values for every object.

        Args:
            query_key: (C^k, H, W) key of the current frame

        Returns:
            (N, C^v, H, W) readout

        Raises:
            PreconditionError: If the bank is empty
            ShapeError: If the query key does not match the stored keys
        """
        weights = ops.transpose(self.affinity(query_key))
        h, w = self._extent  # type: ignore[misc]
        slabs = []
        # One product per object: slab n never mixes with the others.
        for n in range(self.n_objects):
            memory = ops.concat(
                [ops.reshape(ops.index(v, n), (self.value_dim, h * w)) for v in self.values],
                axis=1,
            )
            slabs.append(ops.matmul(memory, weights))
        return ops.reshape(ops.stack(slabs, axis=0), (self.n_objects, self.value_dim, h, w))


def insert(bank: MemoryBank, key: Tensor, values: Tensor) -> MemoryBank:
    return bank.insert(key, values)


def readout(bank: MemoryBank, query_key: Tensor) -> Tensor:
    return bank.readout(query_key)
