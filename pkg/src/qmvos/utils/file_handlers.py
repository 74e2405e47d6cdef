"""
File handling utilities.

Frames are binary PPM (P6), label maps binary PGM (P5, pixel = label index),
and a plain-text manifest lists the image files of a sequence in order.

Video directory layout:
    frames.txt, frames/00000.ppm, ...
    masks.txt,  masks/00000.pgm, ...   (optional ground truth)
"""

import json
import logging
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import numpy as np
from PIL import Image, UnidentifiedImageError

from qmvos.core.exceptions import FormatError

logger = logging.getLogger(__name__)

# Only the binary variants; Pillow also reads the ASCII P2/P3 forms.
MAGIC = {"PPM": b"P6", "PGM": b"P5"}

FRAMES_MANIFEST = "frames.txt"
MASKS_MANIFEST = "masks.txt"


def ensure_dir(path: Path | str) -> Path:
    """Create directory if it doesn't exist."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _read_image(path: Path | str, mode: str, kind: str) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"{kind} file not found: {path}")
    with path.open("rb") as f:
        magic = f.read(2)
    if magic != MAGIC[kind]:
        raise FormatError(path, f"expected binary {kind} magic {MAGIC[kind]!r}, got {magic!r}")
    try:
        with Image.open(path) as im:
            im.load()
            if im.format != "PPM" or im.mode != mode:
                raise FormatError(path, f"expected an 8-bit {kind} file, got {im.format}/{im.mode}")
            return np.array(im, dtype=np.uint8)
    except (UnidentifiedImageError, OSError, ValueError) as e:
        raise FormatError(path, f"malformed {kind} header or data: {e}") from e


def read_ppm(path: Path | str) -> np.ndarray:
    """Read a binary PPM into an (H, W, 3) uint8 array."""
    return _read_image(path, "RGB", "PPM")


def write_ppm(path: Path | str, rgb: np.ndarray) -> Path:
    """Write an (H, W, 3) uint8 array as binary PPM."""
    if rgb.ndim != 3 or rgb.shape[2] != 3 or rgb.dtype != np.uint8:
        raise FormatError(path, f"expected (H, W, 3) uint8 pixels, got {rgb.shape} {rgb.dtype}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(rgb).save(path, format="PPM")
    return path


def read_pgm(path: Path | str) -> np.ndarray:
    """Read a binary PGM into an (H, W) uint8 array."""
    return _read_image(path, "L", "PGM")


def write_pgm(path: Path | str, labels: np.ndarray) -> Path:
    """Write an (H, W) label map (values 0..255) as binary PGM."""
    if labels.ndim != 2:
        raise FormatError(path, f"expected an (H, W) label map, got {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() > 255):
        raise FormatError(path, "label values must lie in 0..255")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(labels.astype(np.uint8)).save(path, format="PPM")
    return path


def read_manifest(path: Path | str) -> list[Path]:
    """
    Read a manifest: one file name per line, relative to the manifest's directory.

    Raises:
        FileNotFoundError: If the manifest is missing
        FormatError: If it lists nothing or names a missing file
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Manifest not found: {path}")
    entries = [line.strip() for line in path.read_text().splitlines() if line.strip()]
    if not entries:
        raise FormatError(path, "manifest lists no files")
    files = [path.parent / entry for entry in entries]
    for entry, file in zip(entries, files, strict=True):
        if not file.exists():
            raise FormatError(path, f"listed file '{entry}' does not exist")
    return files


def write_manifest(path: Path | str, files: Sequence[Path | str]) -> Path:
    """Write a manifest with paths relative to its own directory."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [Path(f).relative_to(path.parent).as_posix() for f in files]
    path.write_text("\n".join(lines) + "\n")
    return path


def _stack(arrays: list[np.ndarray], source: Path) -> np.ndarray:
    shapes = {a.shape for a in arrays}
    if len(shapes) != 1:
        raise FormatError(source, f"images in a sequence differ in size: {sorted(shapes)}")
    return np.stack(arrays)


def save_label_sequence(directory: Path | str, labels: np.ndarray | Sequence[np.ndarray]) -> Path:
    """Write label maps as masks/NNNNN.pgm plus masks.txt; returns the manifest path."""
    directory = ensure_dir(directory)
    files = [write_pgm(directory / "masks" / f"{t:05d}.pgm", m) for t, m in enumerate(labels)]
    return write_manifest(directory / MASKS_MANIFEST, files)


def load_label_sequence(directory: Path | str) -> np.ndarray:
    """Read masks.txt and its PGM files into a (T, H, W) uint8 array."""
    manifest = Path(directory) / MASKS_MANIFEST
    return _stack([read_pgm(f) for f in read_manifest(manifest)], manifest)


def save_video(
    directory: Path | str, frames: np.ndarray, labels: np.ndarray | None = None
) -> Path:
    """
    Write a video directory.

    Args:
        directory: Destination
        frames: (T, H, W, 3) uint8
        labels: Optional (T, H, W) ground-truth label maps
    """
    directory = ensure_dir(directory)
    files = [write_ppm(directory / "frames" / f"{t:05d}.ppm", f) for t, f in enumerate(frames)]
    write_manifest(directory / FRAMES_MANIFEST, files)
    if labels is not None:
        save_label_sequence(directory, labels)
    logger.info(f"💾 Wrote {len(files)} frames to {directory}")
    return directory


def load_video(directory: Path | str) -> tuple[np.ndarray, np.ndarray | None]:
    """
    Read a video directory.

    Returns:
        (frames (T, H, W, 3) uint8, labels (T, H, W) uint8 or None when no masks.txt)
    """
    directory = Path(directory)
    manifest = directory / FRAMES_MANIFEST
    frames = _stack([read_ppm(f) for f in read_manifest(manifest)], manifest)
    labels = None
    if (directory / MASKS_MANIFEST).exists():
        labels = load_label_sequence(directory)
        if labels.shape != frames.shape[:3]:
            raise FormatError(
                directory / MASKS_MANIFEST,
                f"masks {labels.shape} do not match frames {frames.shape[:3]}",
            )
    return frames, labels


def write_json(path: Path | str, data: Any) -> Path:
    """Write JSON with stable key order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2) + "\n")
    return path


def read_json(path: Path | str) -> Any:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"JSON file not found: {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise FormatError(path, f"invalid JSON: {e}") from e
