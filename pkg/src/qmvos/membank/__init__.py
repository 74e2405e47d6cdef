"""
Memory bank and affinity kernels.

Importing this package registers the built-in kernels.
"""

from qmvos.membank import affinity  # noqa: F401 - registers kernels
from qmvos.membank.affinity import DotProductAffinity, L2Affinity, affinity_from_logits
from qmvos.membank.bank import MemoryBank, should_memorize, insert, readout

__all__ = [
    "DotProductAffinity",
    "L2Affinity",
    "affinity_from_logits",
    "MemoryBank",
    "should_memorize",
    "insert",
    "readout",
]
