"""Utils module."""

from qmvos.utils.file_handlers import (
    FRAMES_MANIFEST,
    MASKS_MANIFEST,
    ensure_dir,
    read_ppm,
    write_ppm,
    read_pgm,
    write_pgm,
    read_manifest,
    write_manifest,
    save_video,
    load_video,
    save_label_sequence,
    load_label_sequence,
    write_json,
    read_json,
)

__all__ = [
    "FRAMES_MANIFEST",
    "MASKS_MANIFEST",
    "ensure_dir",
    "read_ppm",
    "write_ppm",
    "read_pgm",
    "write_pgm",
    "read_manifest",
    "write_manifest",
    "save_video",
    "load_video",
    "save_label_sequence",
    "load_label_sequence",
    "write_json",
    "read_json",
]
