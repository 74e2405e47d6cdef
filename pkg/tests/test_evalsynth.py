"""
Tests for J / F metrics and the synthetic video generator.
"""

import itertools

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from qmvos.core import ConfigurationError, InputError, ShapeError
from qmvos.evalsynth import (
    MetricReport,
    boundary_map,
    contour_f,
    default_tol_radius,
    evaluate_sequence,
    gen_synthetic,
    j_and_f,
    jaccard,
)


def _square(size=16, top=4, left=4, side=6) -> np.ndarray:
    mask = np.zeros((size, size), dtype=np.uint8)
    mask[top : top + side, left : left + side] = 1
    return mask


def _brute_force_f(pred: np.ndarray, gt: np.ndarray, obj: int, tol: int) -> float:
    """Boundary F by pairwise Chebyshev distances."""

    def boundary(region):
        h, w = region.shape
        points = []
        for y, x in itertools.product(range(h), range(w)):
            if not region[y, x]:
                continue
            neighbours = [(y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)]
            if any(not (0 <= a < h and 0 <= b < w) or not region[a, b] for a, b in neighbours):
                points.append((y, x))
        return points

    bp, bg = boundary(pred == obj), boundary(gt == obj)
    if not bp and not bg:
        return 1.0
    if not bp or not bg:
        return 0.0

    def matched(src, dst):
        return sum(any(max(abs(a - c), abs(b - d)) <= tol for c, d in dst) for a, b in src)

    p, r = matched(bp, bg) / len(bp), matched(bg, bp) / len(bg)
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


# =============================================================================
# Metrics
# =============================================================================


class TestJaccard:
    def test_identical(self):
        assert jaccard(_square(), _square(), 1) == 1.0

    def test_disjoint(self):
        assert jaccard(_square(left=0, side=3), _square(left=10, side=3), 1) == 0.0

    def test_one_third(self):
        pred = np.zeros((2, 4), dtype=np.uint8)
        gt = np.zeros((2, 4), dtype=np.uint8)
        pred[0, :4] = 1
        gt[0, :2] = 1
        gt[1, :2] = 1
        assert jaccard(pred, gt, 1) == pytest.approx(1 / 3)

    def test_both_empty_and_one_empty(self):
        empty = np.zeros((4, 4), dtype=np.uint8)
        assert jaccard(empty, empty, 1) == 1.0
        assert jaccard(empty, _square(4, 0, 0, 2), 1) == 0.0

    def test_symmetric_and_translation_invariant(self, rng):
        a = _square(size=24, top=5, left=6, side=7)
        b = _square(size=24, top=8, left=7, side=6)
        assert jaccard(a, b, 1) == jaccard(b, a, 1)
        shifted = jaccard(np.roll(a, (3, 2), (0, 1)), np.roll(b, (3, 2), (0, 1)), 1)
        assert shifted == jaccard(a, b, 1)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            jaccard(np.zeros((4, 4)), np.zeros((4, 5)), 1)


class TestContourF:
    def test_identical(self):
        assert contour_f(_square(), _square(), 1, tol_radius=1) == 1.0

    def test_shifted_square_within_tolerance(self):
        assert contour_f(_square(left=4), _square(left=5), 1, tol_radius=1) == 1.0

    def test_far_boundaries(self):
        assert contour_f(_square(left=0, side=3), _square(left=11, side=3), 1, tol_radius=1) == 0.0

    def test_empty_boundaries(self):
        empty = np.zeros((8, 8), dtype=np.uint8)
        assert contour_f(empty, empty, 1) == 1.0
        assert contour_f(empty, _square(8, 2, 2, 3), 1) == 0.0

    @pytest.mark.parametrize("tol", [0, 1, 2])
    def test_matches_brute_force(self, rng, tol):
        for _ in range(5):
            pred = (rng.random((20, 20)) < 0.4).astype(np.uint8)
            gt = _square(20, int(rng.integers(0, 8)), int(rng.integers(0, 8)), 9)
            expected = _brute_force_f(pred, gt, 1, tol)
            assert contour_f(pred, gt, 1, tol_radius=tol) == pytest.approx(expected, abs=1e-12)

    def test_symmetric(self, rng):
        a = (rng.random((16, 16)) < 0.5).astype(np.uint8)
        b = _square()
        assert contour_f(a, b, 1, 1) == pytest.approx(contour_f(b, a, 1, 1))

    def test_boundary_map_of_square(self):
        boundary = boundary_map(_square(10, 2, 2, 4) == 1)
        assert np.count_nonzero(boundary) == 12

    @pytest.mark.parametrize("h, w, expected", [(32, 32, 1), (480, 854, 8), (64, 64, 1)])
    def test_default_tol_radius(self, h, w, expected):
        assert default_tol_radius(h, w) == expected


class TestJAndF:
    def test_perfect(self):
        assert j_and_f([[1.0, 1.0]], [[1.0, 1.0]]).j_and_f == 1.0

    def test_j_only(self):
        assert j_and_f([[1.0, 1.0]], [[0.0, 0.0]]).j_and_f == 0.5

    def test_objects_are_averaged(self):
        report = j_and_f([[1.0], [0.0]], [[1.0], [0.0]])
        assert report.j_and_f == 0.5
        assert report.j_per_object == [1.0, 0.0]

    def test_empty(self):
        with pytest.raises(InputError):
            j_and_f(np.zeros((1, 0)), np.zeros((1, 0)))

    def test_recall_and_decay(self):
        report = j_and_f([[1.0, 1.0, 0.0, 0.0]], [[1.0, 1.0, 1.0, 1.0]])
        assert report.j_recall == 0.5
        assert report.j_decay == 1.0
        assert report.f_decay == 0.0

    def test_json_round_trip_keeps_key_order(self):
        report = j_and_f([[0.5, 0.75]], [[1.0, 0.25]], frames=[1, 2])
        text = report.to_json()
        assert MetricReport.from_json(text) == report
        keys = list(MetricReport.model_fields)
        positions = [text.index(f'"{k}"') for k in keys]
        assert positions == sorted(positions)


class TestEvaluateSequence:
    def test_perfect_prediction(self, video):
        report = evaluate_sequence(list(video.labels), list(video.labels))
        assert report.j_and_f == 1.0
        assert report.frames == list(range(1, video.n_frames))

    def test_first_frame_is_excluded(self, video):
        preds = list(video.labels)
        preds[0] = np.zeros_like(preds[0])
        assert evaluate_sequence(preds, list(video.labels)).j_and_f == 1.0

    def test_length_mismatch(self, video):
        with pytest.raises(InputError):
            evaluate_sequence(list(video.labels[:3]), list(video.labels))

    def test_annotation_only(self, video):
        with pytest.raises(InputError, match="empty"):
            evaluate_sequence([video.labels[0]], [video.labels[0]])


# =============================================================================
# Synthetic videos
# =============================================================================


class TestGenSynthetic:
    @pytest.mark.parametrize("scenario", ["distinct", "similar", "occluding"])
    def test_deterministic(self, scenario):
        a = gen_synthetic(7, 3, 5, 32, 48, scenario)
        b = gen_synthetic(7, 3, 5, 32, 48, scenario)
        assert a.frames.tobytes() == b.frames.tobytes()
        assert a.labels.tobytes() == b.labels.tobytes()

    def test_seeds_differ(self):
        a, b = gen_synthetic(1, 2, 3, 32, 32), gen_synthetic(2, 2, 3, 32, 32)
        assert not np.array_equal(a.frames, b.frames)

    def test_shapes_and_labels(self):
        v = gen_synthetic(0, 2, 4, 32, 48)
        assert v.frames.shape == (4, 32, 48, 3) and v.frames.dtype == np.uint8
        assert v.labels.shape == (4, 32, 48)
        assert set(np.unique(v.labels)) <= {0, 1, 2}
        assert v.n_objects == 2 and v.n_frames == 4

    @pytest.mark.parametrize("scenario", ["distinct", "similar", "occluding"])
    @pytest.mark.parametrize("seed", range(5))
    def test_every_object_visible_in_first_frame(self, scenario, seed):
        v = gen_synthetic(seed, 3, 2, 32, 32, scenario)
        assert set(range(1, 4)) <= set(np.unique(v.labels[0]).tolist())

    def test_similar_objects_share_colour(self):
        v = gen_synthetic(0, 2, 2, 32, 32, "similar")
        assert v.shapes[0].color == v.shapes[1].color
        assert v.shapes[0].size == v.shapes[1].size

    def test_later_object_wins_overlap(self):
        v = gen_synthetic(0, 2, 16, 64, 64, "occluding")
        overlaps = 0
        for t in range(v.n_frames):
            both = v.shapes[0].rasterize(t, 64, 64) & v.shapes[1].rasterize(t, 64, 64)
            overlaps += int(both.sum())
            assert_array_equal(v.labels[t][both], 2)
        assert overlaps > 0

    def test_labels_match_painted_colours(self):
        v = gen_synthetic(4, 2, 3, 32, 32)
        for n, shape in enumerate(v.shapes, start=1):
            painted = v.frames[0][v.labels[0] == n]
            assert (painted == np.array(shape.color, dtype=np.uint8)).all()

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"height": 30},
            {"width": 0},
            {"n_objects": 0},
            {"n_objects": 256},
            {"n_frames": 0},
        ],
    )
    def test_invalid_arguments(self, kwargs):
        args = {"seed": 0, "n_objects": 2, "n_frames": 2, "height": 32, "width": 32, **kwargs}
        with pytest.raises(InputError):
            gen_synthetic(**args)

    def test_unknown_scenario(self):
        with pytest.raises(ConfigurationError):
            gen_synthetic(0, 2, 2, 32, 32, "crowded")
