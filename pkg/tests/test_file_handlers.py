"""
Tests for PPM/PGM, manifest, video directory and JSON I/O.
"""

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from qmvos.core import FormatError
from qmvos.utils import (
    FRAMES_MANIFEST,
    MASKS_MANIFEST,
    load_label_sequence,
    load_video,
    read_json,
    read_manifest,
    read_pgm,
    read_ppm,
    save_label_sequence,
    save_video,
    write_json,
    write_manifest,
    write_pgm,
    write_ppm,
)


class TestImages:
    """Binary PPM and PGM."""

    def test_ppm(self, tmp_path, rng):
        rgb = rng.integers(0, 256, size=(5, 7, 3), dtype=np.uint8)
        path = write_ppm(tmp_path / "a.ppm", rgb)
        assert path.read_bytes().startswith(b"P6")
        assert_array_equal(read_ppm(path), rgb)

    def test_pgm(self, tmp_path):
        labels = np.array([[0, 1, 2], [3, 0, 255]], dtype=np.int64)
        path = write_pgm(tmp_path / "a.pgm", labels)
        assert path.read_bytes().startswith(b"P5")
        out = read_pgm(path)
        assert out.dtype == np.uint8
        assert_array_equal(out, labels)

    def test_ppm_rejects_non_uint8(self, tmp_path):
        with pytest.raises(FormatError):
            write_ppm(tmp_path / "a.ppm", np.zeros((2, 2, 3)))

    def test_pgm_rejects_out_of_range(self, tmp_path):
        with pytest.raises(FormatError, match="0..255"):
            write_pgm(tmp_path / "a.pgm", np.array([[0, 300]]))

    def test_pgm_is_not_a_ppm(self, tmp_path):
        path = write_pgm(tmp_path / "a.pgm", np.zeros((2, 2), dtype=np.uint8))
        with pytest.raises(FormatError):
            read_ppm(path)

    @pytest.mark.parametrize("content", [b"hello", b"P6\n4 4\n255\n\x00\x01"])
    def test_malformed(self, tmp_path, content):
        path = tmp_path / "bad.ppm"
        path.write_bytes(content)
        with pytest.raises(FormatError, match="bad.ppm"):
            read_ppm(path)

    @pytest.mark.parametrize(
        "name, content, reader",
        [
            ("ascii.ppm", b"P3\n2 1\n255\n0 0 0 255 255 255\n", read_ppm),
            ("ascii.pgm", b"P2\n2 1\n255\n0 1\n", read_pgm),
        ],
    )
    def test_ascii_variants_rejected(self, tmp_path, name, content, reader):
        path = tmp_path / name
        path.write_bytes(content)
        with pytest.raises(FormatError, match="binary"):
            reader(path)

    def test_missing(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_pgm(tmp_path / "none.pgm")


class TestManifest:
    def test_relative_entries(self, tmp_path):
        files = [write_pgm(tmp_path / "m" / f"{i}.pgm", np.zeros((1, 1))) for i in range(3)]
        manifest = write_manifest(tmp_path / "list.txt", files)
        assert manifest.read_text() == "m/0.pgm\nm/1.pgm\nm/2.pgm\n"
        assert read_manifest(manifest) == files

    def test_blank_lines_ignored(self, tmp_path):
        write_pgm(tmp_path / "a.pgm", np.zeros((1, 1)))
        (tmp_path / "list.txt").write_text("\na.pgm\n\n")
        assert read_manifest(tmp_path / "list.txt") == [tmp_path / "a.pgm"]

    def test_empty(self, tmp_path):
        (tmp_path / "list.txt").write_text("\n")
        with pytest.raises(FormatError, match="no files"):
            read_manifest(tmp_path / "list.txt")

    def test_missing_entry(self, tmp_path):
        (tmp_path / "list.txt").write_text("ghost.pgm\n")
        with pytest.raises(FormatError, match="ghost.pgm"):
            read_manifest(tmp_path / "list.txt")


class TestVideoDirectory:
    def test_round_trip(self, tmp_path, video):
        save_video(tmp_path / "v", video.frames, video.labels)
        assert (tmp_path / "v" / FRAMES_MANIFEST).exists()
        assert (tmp_path / "v" / MASKS_MANIFEST).exists()
        frames, labels = load_video(tmp_path / "v")
        assert_array_equal(frames, video.frames)
        assert_array_equal(labels, video.labels)

    def test_without_masks(self, tmp_path, video):
        save_video(tmp_path / "v", video.frames)
        frames, labels = load_video(tmp_path / "v")
        assert labels is None
        assert frames.shape == video.frames.shape

    def test_label_sequence(self, tmp_path, video):
        save_label_sequence(tmp_path / "pred", video.labels)
        assert_array_equal(load_label_sequence(tmp_path / "pred"), video.labels)

    def test_mismatched_masks(self, tmp_path, video):
        save_video(tmp_path / "v", video.frames, video.labels)
        save_label_sequence(tmp_path / "v", video.labels[:2])
        with pytest.raises(FormatError, match="do not match"):
            load_video(tmp_path / "v")

    def test_mixed_sizes(self, tmp_path, video):
        save_label_sequence(tmp_path / "p", [video.labels[0], video.labels[0][:16]])
        with pytest.raises(FormatError, match="differ in size"):
            load_label_sequence(tmp_path / "p")


class TestJson:
    def test_round_trip(self, tmp_path):
        data = {"b": [1, 2], "a": {"x": 0.5}}
        path = write_json(tmp_path / "r" / "out.json", data)
        assert read_json(path) == data
        assert path.read_text().index('"b"') < path.read_text().index('"a"')

    def test_invalid(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{nope")
        with pytest.raises(FormatError, match="invalid JSON"):
            read_json(path)
