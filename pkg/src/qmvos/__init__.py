"""
QMVOS Package

Memory-based semi-supervised video object segmentation with object queries,
built on a small numpy autodiff core and evaluated on synthetic videos.
"""

__version__ = "0.1.0"

from qmvos.core.exceptions import QMVOSError
from qmvos.core.protocols import AffinityKernel, SceneLayout
from qmvos.core.registry import ComponentRegistry

__all__ = [
    "AffinityKernel",
    "SceneLayout",
    "ComponentRegistry",
    "QMVOSError",
    "__version__",
]
