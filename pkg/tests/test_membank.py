"""
Tests for the memory bank, its schedule and the affinity kernels.
"""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from qmvos.core import ConfigurationError, PreconditionError, ShapeError
from qmvos.membank import MemoryBank, insert, readout, should_memorize
from qmvos.tensorlab import Tensor


def _bank(key_dim=4, value_dim=3, n_objects=2, affinity="dot") -> MemoryBank:
    return MemoryBank(key_dim=key_dim, value_dim=value_dim, n_objects=n_objects, affinity=affinity)


# =============================================================================
# Schedule
# =============================================================================


class TestShouldMemorize:
    """Frames 0, r, 2r, ... are memorised."""

    @pytest.mark.parametrize(
        "frame_idx, r, expected",
        [(0, 5, True), (4, 5, False), (5, 5, True), (10, 5, True), (3, 1, True), (7, 2, False)],
    )
    def test_schedule(self, frame_idx, r, expected):
        assert should_memorize(frame_idx, r) is expected

    def test_memorised_frames_of_a_sequence(self):
        assert [t for t in range(12) if should_memorize(t, 5)] == [0, 5, 10]

    @pytest.mark.parametrize("r", [0, -1])
    def test_rejects_bad_interval(self, r):
        with pytest.raises(ConfigurationError, match="mem_interval"):
            should_memorize(3, r)

    def test_rejects_negative_frame(self):
        with pytest.raises(ConfigurationError):
            should_memorize(-1, 5)


# =============================================================================
# Readout
# =============================================================================


class TestReadout:
    """Softmax-weighted values."""

    def test_two_pixel_oracle(self):
        """T=1, 1x2 memory, C^k=1: weights from an explicit softmax."""
        bank = _bank(key_dim=1, value_dim=1, n_objects=1)
        keys = np.array([[[1.0, -2.0]]])
        values = np.array([[[[3.0, 7.0]]]])
        bank.insert(Tensor(keys), Tensor(values))
        query = np.array([[[0.5, 2.0]]])

        out = bank.readout(Tensor(query)).data
        for j, q in enumerate(query[0, 0]):
            logits = [q * k for k in keys[0, 0]]
            e = [math.exp(v - max(logits)) for v in logits]
            expected = (e[0] * 3.0 + e[1] * 7.0) / (e[0] + e[1])
            assert abs(out[0, 0, 0, j] - expected) < 1e-12

    def test_dot_logits_are_scaled(self):
        bank = _bank(key_dim=4, value_dim=1, n_objects=1)
        keys = np.zeros((4, 1, 2))
        keys[:, 0, 0] = 1.0
        bank.insert(Tensor(keys), Tensor(np.array([[[[0.0, 1.0]]]])))
        out = bank.readout(Tensor(np.ones((4, 1, 2)))).data
        # logits (4, 0) / sqrt(4)
        assert_allclose(out[0, 0, 0], 1.0 / (1.0 + math.exp(2.0)), atol=1e-12)

    def test_identical_keys_give_spatial_mean(self, rng):
        bank = _bank()
        values = rng.standard_normal((2, 3, 2, 2))
        bank.insert(Tensor(np.ones((4, 2, 2))), Tensor(values))
        out = bank.readout(Tensor(rng.standard_normal((4, 2, 2)))).data
        mean = values.mean(axis=(2, 3))
        assert_allclose(out, np.broadcast_to(mean[:, :, None, None], out.shape), atol=1e-12)

    def test_constant_values(self, rng):
        bank = _bank()
        bank.insert(Tensor(rng.standard_normal((4, 3, 3))), Tensor(np.full((2, 3, 3, 3), 2.5)))
        bank.insert(Tensor(rng.standard_normal((4, 3, 3))), Tensor(np.full((2, 3, 3, 3), 2.5)))
        out = bank.readout(Tensor(rng.standard_normal((4, 3, 3)))).data
        assert_allclose(out, 2.5, atol=1e-12)

    def test_within_value_envelope(self, rng):
        bank = _bank()
        values = rng.standard_normal((2, 3, 2, 3))
        bank.insert(Tensor(rng.standard_normal((4, 2, 3))), Tensor(values))
        out = bank.readout(Tensor(rng.standard_normal((4, 2, 3)))).data
        lo = values.min(axis=(2, 3))[:, :, None, None]
        hi = values.max(axis=(2, 3))[:, :, None, None]
        assert np.all(out >= lo - 1e-12) and np.all(out <= hi + 1e-12)

    def test_duplicate_frame_leaves_readout_unchanged(self, rng):
        key = Tensor(rng.standard_normal((4, 2, 2)))
        values = Tensor(rng.standard_normal((2, 3, 2, 2)))
        query = Tensor(rng.standard_normal((4, 2, 2)))
        once = _bank().insert(key, values).readout(query).data
        twice = _bank().insert(key, values).insert(key, values).readout(query).data
        assert_allclose(twice, once, atol=1e-10)

    @pytest.mark.parametrize("kernel", ["dot", "l2"])
    def test_affinity_rows_sum_to_one(self, rng, kernel):
        bank = _bank(affinity=kernel)
        for _ in range(3):
            bank.insert(
                Tensor(rng.standard_normal((4, 2, 3))), Tensor(rng.standard_normal((2, 3, 2, 3)))
            )
        weights = bank.affinity(Tensor(rng.standard_normal((4, 2, 3)))).data
        assert weights.shape == (6, 18)
        assert_allclose(weights.sum(axis=1), 1.0, atol=1e-12)

    def test_l2_prefers_nearest_key(self):
        bank = _bank(key_dim=1, value_dim=1, n_objects=1, affinity="l2")
        bank.insert(Tensor(np.array([[[0.0, 10.0]]])), Tensor(np.array([[[[0.0, 1.0]]]])))
        out = bank.readout(Tensor(np.array([[[9.0, 9.0]]]))).data
        assert np.all(out > 0.99)

    def test_l2_differs_from_dot_on_large_keys(self):
        keys = Tensor(np.array([[[1.0, 10.0]]]))
        values = Tensor(np.array([[[[0.0, 1.0]]]]))
        query = Tensor(np.array([[[1.0, 1.0]]]))
        dot = _bank(1, 1, 1, "dot").insert(keys, values).readout(query).data
        l2 = _bank(1, 1, 1, "l2").insert(keys, values).readout(query).data
        assert dot[0, 0, 0, 0] > 0.5 > l2[0, 0, 0, 0]

    def test_functional_wrappers(self, rng):
        bank = _bank()
        key = Tensor(rng.standard_normal((4, 2, 2)))
        values = Tensor(rng.standard_normal((2, 3, 2, 2)))
        assert insert(bank, key, values) is bank
        assert_allclose(readout(bank, key).data, bank.readout(key).data)
        assert len(bank) == bank.size == 1


# =============================================================================
# Errors
# =============================================================================


class TestBankErrors:
    def test_empty_readout(self):
        with pytest.raises(PreconditionError):
            _bank().readout(Tensor(np.zeros((4, 2, 2))))

    def test_wrong_key_channels(self):
        with pytest.raises(ShapeError):
            _bank().insert(Tensor(np.zeros((3, 2, 2))), Tensor(np.zeros((2, 3, 2, 2))))

    def test_wrong_value_shape(self):
        with pytest.raises(ShapeError):
            _bank().insert(Tensor(np.zeros((4, 2, 2))), Tensor(np.zeros((1, 3, 2, 2))))

    def test_extent_mismatch(self):
        bank = _bank().insert(Tensor(np.zeros((4, 2, 2))), Tensor(np.zeros((2, 3, 2, 2))))
        with pytest.raises(ShapeError):
            bank.insert(Tensor(np.zeros((4, 3, 3))), Tensor(np.zeros((2, 3, 3, 3))))
        with pytest.raises(ShapeError):
            bank.readout(Tensor(np.zeros((4, 3, 3))))

    def test_bad_construction(self):
        with pytest.raises(ConfigurationError):
            MemoryBank(4, 3, 2, interval=0)
        with pytest.raises(ConfigurationError):
            MemoryBank(4, 3, 0)


class TestReadoutEquivariance:
    def test_permuting_value_slabs_permutes_readout(self, rng):
        order = [1, 2, 0]
        key = Tensor(rng.standard_normal((4, 2, 3)))
        values = rng.standard_normal((3, 3, 2, 3))
        query = Tensor(rng.standard_normal((4, 2, 3)))
        base = _bank(n_objects=3).insert(key, Tensor(values)).readout(query).data
        permuted = _bank(n_objects=3).insert(key, Tensor(values[order])).readout(query).data
        assert_array_equal(permuted, base[order])

    def test_frame_order_does_not_matter(self, rng):
        frames = [
            (Tensor(rng.standard_normal((4, 2, 3))), Tensor(rng.standard_normal((2, 3, 2, 3))))
            for _ in range(3)
        ]
        query = Tensor(rng.standard_normal((4, 2, 3)))
        in_order, reversed_order = _bank(), _bank()
        for key, values in frames:
            in_order.insert(key, values)
        for key, values in reversed(frames):
            reversed_order.insert(key, values)
        expected = in_order.readout(query).data
        assert_allclose(reversed_order.readout(query).data, expected, atol=1e-12)

    def test_object_slabs_are_independent(self, rng):
        key = Tensor(rng.standard_normal((4, 2, 3)))
        values = rng.standard_normal((2, 3, 2, 3))
        query = Tensor(rng.standard_normal((4, 2, 3)))
        changed = values.copy()
        changed[1] = rng.standard_normal((3, 2, 3))
        base = _bank().insert(key, Tensor(values)).readout(query).data
        out = _bank().insert(key, Tensor(changed)).readout(query).data
        assert_array_equal(out[0], base[0])
        assert not np.allclose(out[1], base[1])
