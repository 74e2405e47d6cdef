"""
QMVW1 weight files.

Layout: the magic bytes b"QMVW1", then one record per parameter in name order:
u64 name length, UTF-8 name, u64 rank, rank x u64 extents, float64 data.
All integers and floats are little-endian.
"""

import logging
import struct
from collections.abc import Mapping
from pathlib import Path

import numpy as np

from qmvos.core.exceptions import FormatError
from qmvos.tensorlab.optim import ParamStore

logger = logging.getLogger(__name__)

MAGIC = b"QMVW1"
_U64 = struct.Struct("<Q")


def encode_params(arrays: Mapping[str, np.ndarray]) -> bytes:
    """Serialize named arrays to QMVW1 bytes (records sorted by name)."""
    chunks = [MAGIC]
    for name in sorted(arrays):
        arr = np.ascontiguousarray(arrays[name], dtype="<f8")
        raw_name = name.encode("utf-8")
        chunks.append(_U64.pack(len(raw_name)))
        chunks.append(raw_name)
        chunks.append(_U64.pack(arr.ndim))
        chunks.extend(_U64.pack(n) for n in arr.shape)
        chunks.append(arr.tobytes())
    return b"".join(chunks)


class _Reader:
    def __init__(self, blob: bytes, source: str | Path):
        self._blob = blob
        self._pos = 0
        self._source = source

    @property
    def exhausted(self) -> bool:
        return self._pos >= len(self._blob)

    def take(self, n: int, what: str) -> bytes:
        end = self._pos + n
        if end > len(self._blob):
            raise FormatError(self._source, f"truncated while reading {what}")
        chunk = self._blob[self._pos : end]
        self._pos = end
        return chunk

    def u64(self, what: str) -> int:
        return int(_U64.unpack(self.take(8, what))[0])


def decode_params(blob: bytes, source: str | Path = "<bytes>") -> dict[str, np.ndarray]:
    """
    Parse QMVW1 bytes.

    Raises:
        FormatError: On bad magic, truncation, or duplicate names
    """
    reader = _Reader(blob, source)
    if reader.take(len(MAGIC), "magic") != MAGIC:
        raise FormatError(source, "not a QMVW1 weight file (bad magic)")

    arrays: dict[str, np.ndarray] = {}
    while not reader.exhausted:
        name_len = reader.u64("name length")
        try:
            name = reader.take(name_len, "name").decode("utf-8")
        except UnicodeDecodeError as e:
            raise FormatError(source, "parameter name is not UTF-8") from e
        if name in arrays:
            raise FormatError(source, f"duplicate parameter '{name}'")
        rank = reader.u64(f"rank of '{name}'")
        shape = tuple(reader.u64(f"extents of '{name}'") for _ in range(rank))
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        data = reader.take(8 * count, f"data of '{name}'")
        arrays[name] = np.frombuffer(data, dtype="<f8").astype(np.float64).reshape(shape)
    return arrays


def save_params(store: ParamStore | Mapping[str, np.ndarray], path: str | Path) -> Path:
    """Write parameters to a QMVW1 file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arrays = store.arrays() if isinstance(store, ParamStore) else store
    path.write_bytes(encode_params(arrays))
    logger.info(f"💾 Saved {len(arrays)} parameters to {path}")
    return path


def load_params(
    path: str | Path, expected: Mapping[str, tuple[int, ...]] | None = None
) -> ParamStore:
    """
    Read a QMVW1 file into a fresh ParamStore.

    Args:
        path: Weight file
        expected: Required name -> shape mapping; every entry must be present
            with that shape and no extra names may appear

    Raises:
        FileNotFoundError: If the file is missing
        FormatError: On malformed content or a name/shape mismatch
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Weight file not found: {path}")
    arrays = decode_params(path.read_bytes(), path)

    if expected is not None:
        for name, shape in expected.items():
            if name not in arrays:
                raise FormatError(path, f"missing parameter '{name}'")
            if arrays[name].shape != tuple(shape):
                raise FormatError(
                    path, f"parameter '{name}' has shape {arrays[name].shape}, not {tuple(shape)}"
                )
        extra = sorted(set(arrays) - set(expected))
        if extra:
            raise FormatError(path, f"unexpected parameter '{extra[0]}'")

    logger.debug(f"Loaded {len(arrays)} parameters from {path}")
    return ParamStore.from_arrays(arrays)
