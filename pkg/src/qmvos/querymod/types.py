"""
Object query container.
"""

from dataclasses import dataclass

import numpy as np

from qmvos.core.exceptions import ContractError
from qmvos.tensorlab.tensor import Tensor


@dataclass(frozen=True)
class ObjectQuerySet:
    """
    N object queries of width C^v.

    Attributes:
        q: (N, C^v) query matrix
        empty_flags: Per object, True when its initialising mask had zero weight
    """

    q: Tensor
    empty_flags: tuple[bool, ...]

    def __post_init__(self):
        if self.q.ndim != 2 or self.q.shape[0] < 1:
            raise ContractError("ObjectQuerySet", f"expected (N>=1, C) queries, got {self.q.shape}")
        if len(self.empty_flags) != self.q.shape[0]:
            raise ContractError(
                "ObjectQuerySet",
                f"{len(self.empty_flags)} flags for {self.q.shape[0]} queries",
            )

    @property
    def n_objects(self) -> int:
        return self.q.shape[0]

    @property
    def width(self) -> int:
        return self.q.shape[1]

    def with_queries(self, q: Tensor) -> "ObjectQuerySet":
        """Same flags, new query matrix."""
        return ObjectQuerySet(q=q, empty_flags=self.empty_flags)

    def permuted(self, order: list[int] | np.ndarray) -> "ObjectQuerySet":
        """Reorder objects (detached)."""
        order = list(order)
        return ObjectQuerySet(
            q=Tensor(self.q.data[order]),
            empty_flags=tuple(self.empty_flags[i] for i in order),
        )
