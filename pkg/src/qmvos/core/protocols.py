"""
Component protocols.

Pluggable pieces (memory affinity kernels, synthetic scene layouts) implement
these interfaces and register themselves with the ComponentRegistry.
Uses Protocol for structural subtyping.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Protocol, runtime_checkable

if TYPE_CHECKING:
    import numpy as np

    from qmvos.evalsynth.synthetic import ShapeSpec
    from qmvos.tensorlab.tensor import Tensor


@runtime_checkable
class AffinityKernel(Protocol):
    """
    Protocol for memory affinity kernels.

    Implementations:
        - DotProductAffinity: scaled dot product (default)
        - L2Affinity: negative squared Euclidean distance

    Example:
        >>> kernel = ComponentRegistry.get_affinity("dot")
        >>> logits = kernel.logits(query_rows, memory_keys)
    """

    @property
    def name(self) -> str:
        """Unique identifier for this kernel."""
        ...

    def logits(self, query: Tensor, memory: Tensor) -> Tensor:
        """
        Compute pre-softmax affinities.

        Args:
            query: Query pixels as rows, shape (P, C^k)
            memory: Memory keys as columns, shape (C^k, M)

        Returns:
            Tensor of shape (P, M); softmax over the last axis gives the affinity
        """
        ...


@runtime_checkable
class SceneLayout(Protocol):
    """
    Protocol for synthetic video scenarios.

    Implementations:
        - DistinctLayout: differently coloured shapes
        - SimilarLayout: identical-looking shapes
        - OccludingLayout: shapes whose paths cross
    """

    @property
    def name(self) -> str:
        """Unique identifier for this scenario."""
        ...

    def layout(
        self,
        rng: np.random.Generator,
        n_objects: int,
        n_frames: int,
        height: int,
        width: int,
    ) -> list[ShapeSpec]:
        """Draw the shapes (appearance and motion) for one video."""
        ...
