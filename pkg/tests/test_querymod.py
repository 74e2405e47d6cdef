"""
Tests for query initialisation, SIM and QCIM.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from qmvos.core import ConfigurationError, ContractError, PreconditionError, ShapeError
from qmvos.querymod import (
    INIT_SCALES,
    ObjectQuerySet,
    fuse_in_channels,
    fuse_scales,
    init_queries,
    init_querymod_weights,
    project_f16,
    qcim_refine,
    querymod_param_shapes,
    serialize_content,
    sim_interact,
)
from qmvos.tensorlab import Tensor, grad_check, ops, seeded_rng

PERMUTATION = [2, 0, 1]


@pytest.fixture
def qw(small_cfg):
    return init_querymod_weights(small_cfg, seeded_rng(0)).bind()


@pytest.fixture
def queries(rng, small_cfg):
    return ObjectQuerySet(
        q=Tensor(rng.standard_normal((3, small_cfg.value_dim))), empty_flags=(False,) * 3
    )


def _layer_norm(z, w, prefix):
    centered = z - z.mean(axis=-1, keepdims=True)
    normed = centered / np.sqrt((centered**2).mean(axis=-1, keepdims=True) + ops.LAYER_NORM_EPS)
    return normed * w[f"{prefix}.g"].data + w[f"{prefix}.b"].data


def _attend(x, m, w, prefix, scaled):
    q, k, v = (a @ w[f"{prefix}.{p}.w"].data for a, p in ((x, "q"), (m, "k"), (m, "v")))
    logits = q @ k.T / (np.sqrt(q.shape[1]) if scaled else 1.0)
    e = np.exp(logits - logits.max(axis=1, keepdims=True))
    return (e / e.sum(axis=1, keepdims=True)) @ v


def _ffn(x, w, prefix):
    hidden = np.maximum(0.0, x @ w[f"{prefix}.w1"].data + w[f"{prefix}.b1"].data)
    return hidden @ w[f"{prefix}.w2"].data + w[f"{prefix}.b2"].data


def _random_weights(cfg, seed):
    rng = seeded_rng(seed)
    shapes = querymod_param_shapes(cfg)
    return {name: Tensor(rng.standard_normal(shape)) for name, shape in shapes.items()}


@pytest.fixture
def narrow_cfg(small_cfg):
    return small_cfg.model_copy(update={"value_dim": 4, "ffn_hidden": 6})


# =============================================================================
# Initialisation
# =============================================================================


class TestInitQueries:
    """Mask-weighted pooling."""

    def test_weighted_mean_oracle(self):
        f_fuse = np.arange(8, dtype=np.float64).reshape(2, 2, 2)
        masks = np.array([[[1.0, 0.0], [0.0, 0.0]], [[0.25, 0.75], [0.0, 0.0]]])
        result = init_queries(Tensor(f_fuse), masks)
        assert_allclose(result.q.data[0], f_fuse[:, 0, 0], atol=1e-12)
        expected = (0.25 * f_fuse[:, 0, 0] + 0.75 * f_fuse[:, 0, 1]) / 1.0
        assert_allclose(result.q.data[1], expected, atol=1e-12)
        assert result.empty_flags == (False, False)

    def test_masks_are_pooled_to_feature_stride(self, rng):
        f_fuse = rng.standard_normal((4, 2, 2))
        masks = np.zeros((1, 8, 8))
        masks[0, :4, :4] = 1.0
        q = init_queries(Tensor(f_fuse), masks).q.data
        assert_allclose(q[0], f_fuse[:, 0, 0], atol=1e-12)

    def test_empty_mask_gives_zero_query(self, rng):
        masks = np.zeros((2, 4, 4))
        masks[0, 1, 1] = 1.0
        result = init_queries(Tensor(rng.standard_normal((3, 4, 4))), masks)
        assert result.empty_flags == (False, True)
        assert_array_equal(result.q.data[1], 0.0)

    def test_permutation_equivariant(self, rng):
        f_fuse = Tensor(rng.standard_normal((4, 4, 4)))
        masks = rng.uniform(0.0, 1.0, size=(3, 4, 4))
        base = init_queries(f_fuse, masks).q.data
        permuted = init_queries(f_fuse, masks[PERMUTATION]).q.data
        assert_allclose(permuted, base[PERMUTATION], atol=1e-12)

    @pytest.mark.parametrize("shape", [(4, 4), (0, 4, 4), (1, 6, 6), (1, 8, 4)])
    def test_rejects_bad_masks(self, rng, shape):
        with pytest.raises(ShapeError):
            init_queries(Tensor(rng.standard_normal((3, 4, 4))), np.zeros(shape))

    def test_gradient_wrt_masks(self, rng):
        f_fuse = Tensor(rng.standard_normal((3, 2, 2)))
        masks = rng.uniform(0.2, 1.0, size=(2, 4, 4))
        assert grad_check(lambda m: init_queries(f_fuse, m).q, masks) < 1e-5


class TestFuseScales:
    """Stride-8 fusion variants."""

    def _pyramid(self, rng, cfg):
        return (
            Tensor(rng.standard_normal((cfg.c16, 2, 2))),
            Tensor(rng.standard_normal((cfg.c8, 4, 4))),
            Tensor(rng.standard_normal((cfg.c4, 8, 8))),
        )

    @pytest.mark.parametrize("scales", INIT_SCALES)
    def test_variants(self, rng, small_cfg, scales):
        cfg = small_cfg.model_copy(update={"init_scales": scales})
        w = init_querymod_weights(cfg, seeded_rng(0)).bind()
        f16, f8, f4 = self._pyramid(rng, cfg)
        fused = fuse_scales(f16, f8, w, f4=f4, init_scales=scales)
        assert fused.shape == (cfg.value_dim, 4, 4)
        assert w["sim.conv2.w"].shape[1] == fuse_in_channels(cfg)

    def test_single_channel_oracle(self):
        w = {
            "sim.conv1.w": Tensor(np.array([[2.0]])),
            "sim.conv1.b": Tensor(np.array([0.5])),
            "sim.conv2.w": Tensor(np.array([[1.0, -1.0]])),
            "sim.conv2.b": Tensor(np.array([0.25])),
        }
        f16 = Tensor(np.full((1, 1, 1), 3.0))
        f8 = np.array([[[1.0, 2.0], [3.0, 4.0]]])
        fused = fuse_scales(f16, Tensor(f8), w).data
        # Up(F16) is 3 everywhere; Conv1 gives 6.5; Conv2 takes 6.5 - f8 + 0.25.
        assert_allclose(fused, 6.75 - f8, atol=1e-12)

    def test_f8_only_has_no_upsampling_weights(self, small_cfg):
        cfg = small_cfg.model_copy(update={"init_scales": "f8"})
        assert "sim.conv1.w" not in querymod_param_shapes(cfg)

    def test_f4_required(self, rng, small_cfg):
        cfg = small_cfg.model_copy(update={"init_scales": "f16_f8_f4"})
        w = init_querymod_weights(cfg, seeded_rng(0)).bind()
        f16, f8, _ = self._pyramid(rng, cfg)
        with pytest.raises(ShapeError, match="f4"):
            fuse_scales(f16, f8, w, init_scales="f16_f8_f4")

    def test_mismatched_extents(self, rng, small_cfg, qw):
        f16 = Tensor(rng.standard_normal((small_cfg.c16, 3, 3)))
        f8 = Tensor(rng.standard_normal((small_cfg.c8, 4, 4)))
        with pytest.raises(ShapeError):
            fuse_scales(f16, f8, qw)

    def test_unknown_scales(self, rng, small_cfg, qw):
        f16, f8, _ = self._pyramid(rng, small_cfg)
        with pytest.raises(ConfigurationError, match="init_scales"):
            fuse_scales(f16, f8, qw, init_scales="f32")


# =============================================================================
# SIM and QCIM
# =============================================================================


class TestSimInteract:
    """Multi-object self-attention."""

    def test_shape_and_flags_preserved(self, queries, qw):
        out = sim_interact(queries, qw)
        assert out.q.shape == queries.q.shape
        assert out.empty_flags == queries.empty_flags

    def test_permutation_equivariant(self, queries, qw):
        base = sim_interact(queries, qw).q.data
        permuted = sim_interact(queries.permuted(PERMUTATION), qw).q.data
        assert_allclose(permuted, base[PERMUTATION], atol=1e-12)

    def test_interaction_off_processes_objects_independently(self, queries, qw, rng):
        alone = sim_interact(queries, qw, interaction=False).q.data
        changed = queries.q.data.copy()
        changed[1:] = rng.standard_normal(changed[1:].shape)
        other = ObjectQuerySet(q=Tensor(changed), empty_flags=queries.empty_flags)
        assert_allclose(sim_interact(other, qw, interaction=False).q.data[0], alone[0])

    def test_interaction_on_mixes_objects(self, queries, qw, rng):
        base = sim_interact(queries, qw).q.data
        changed = queries.q.data.copy()
        changed[1:] = rng.standard_normal(changed[1:].shape)
        other = ObjectQuerySet(q=Tensor(changed), empty_flags=queries.empty_flags)
        assert not np.allclose(sim_interact(other, qw).q.data[0], base[0])

    @pytest.mark.parametrize("interaction", [True, False])
    def test_two_object_oracle(self, narrow_cfg, rng, interaction):
        w = _random_weights(narrow_cfg, 1)
        x = rng.standard_normal((2, 4))
        p = "sim.block0"
        if interaction:
            attended = _attend(x, x, w, f"{p}.sa", scaled=True)
        else:
            attended = x @ w[f"{p}.sa.v.w"].data
        x_hat = _layer_norm(x + attended, w, f"{p}.ln1")
        expected = _layer_norm(x_hat + _ffn(x_hat, w, f"{p}.ffn"), w, f"{p}.ln2")
        queries = ObjectQuerySet(q=Tensor(x), empty_flags=(False, False))
        out = sim_interact(queries, w, interaction=interaction).q.data
        assert_allclose(out, expected, atol=1e-12)

    def test_output_rows_are_normalised(self, queries, qw):
        q = sim_interact(queries, qw).q.data
        assert_allclose(q.mean(axis=1), 0.0, atol=1e-10)


class TestQcimRefine:
    """Query-content cross-attention."""

    def test_readout_content(self, queries, qw, rng, small_cfg):
        readout = Tensor(rng.standard_normal((3, small_cfg.value_dim, 2, 2)))
        out = qcim_refine(queries, readout, qw)
        assert out.q.shape == queries.q.shape

    def test_permutation_equivariant(self, queries, qw, rng, small_cfg):
        readout = rng.standard_normal((3, small_cfg.value_dim, 2, 2))
        base = qcim_refine(queries, Tensor(readout), qw).q.data
        permuted = qcim_refine(
            queries.permuted(PERMUTATION), Tensor(readout[PERMUTATION]), qw
        ).q.data
        assert_allclose(permuted, base[PERMUTATION], atol=1e-12)

    def test_sim_then_qcim_permutation_equivariant(self, queries, qw, rng, small_cfg):
        readout = rng.standard_normal((3, small_cfg.value_dim, 2, 2))

        def both(x, r):
            return qcim_refine(sim_interact(x, qw), Tensor(r), qw).q.data

        base = both(queries, readout)
        permuted = both(queries.permuted(PERMUTATION), readout[PERMUTATION])
        assert_allclose(permuted, base[PERMUTATION], atol=1e-12)

    @pytest.mark.parametrize("scaled", [False, True])
    def test_two_object_oracle(self, narrow_cfg, rng, scaled):
        w = _random_weights(narrow_cfg, 2)
        x = rng.standard_normal((2, 4))
        readout = rng.standard_normal((2, 4, 2, 2))
        content = readout.transpose(0, 2, 3, 1).reshape(8, 4)
        p = "qcim.block0"
        x1 = _layer_norm(x + _attend(x, x, w, f"{p}.sa", scaled=True), w, f"{p}.ln1")
        x2 = _layer_norm(x1 + _attend(x1, content, w, f"{p}.ca", scaled), w, f"{p}.ln2")
        expected = _layer_norm(x2 + _ffn(x2, w, f"{p}.ffn"), w, f"{p}.ln3")
        queries = ObjectQuerySet(q=Tensor(x), empty_flags=(False, False))
        out = qcim_refine(queries, Tensor(readout), w, scaled=scaled).q.data
        assert_allclose(out, expected, atol=1e-12)

    def test_identical_content_rows(self, narrow_cfg, rng):
        w = _random_weights(narrow_cfg, 3)
        queries = ObjectQuerySet(q=Tensor(rng.standard_normal((2, 4))), empty_flags=(False,) * 2)
        row = rng.standard_normal(4)
        readout = np.broadcast_to(row[None, :, None, None], (2, 4, 2, 2)).copy()
        repeated = qcim_refine(queries, Tensor(readout), w).q.data
        single = qcim_refine(queries, Tensor(row.reshape(4, 1, 1)), w).q.data
        assert_allclose(repeated, single, atol=1e-12)

    def test_single_object_single_pixel(self, narrow_cfg, rng):
        w = _random_weights(narrow_cfg, 4)
        x, m = rng.standard_normal((1, 4)), rng.standard_normal((1, 4))
        p = "qcim.block0"
        # One key on each side: attention returns the value projection.
        x1 = _layer_norm(x + x @ w[f"{p}.sa.v.w"].data, w, f"{p}.ln1")
        x2 = _layer_norm(x1 + m @ w[f"{p}.ca.v.w"].data, w, f"{p}.ln2")
        expected = _layer_norm(x2 + _ffn(x2, w, f"{p}.ffn"), w, f"{p}.ln3")
        queries = ObjectQuerySet(q=Tensor(x), empty_flags=(False,))
        out = qcim_refine(queries, Tensor(m.reshape(1, 4, 1, 1)), w).q.data
        assert_allclose(out, expected, atol=1e-12)

    def test_scaled_cross_attention_changes_output(self, queries, qw, rng, small_cfg):
        readout = Tensor(3.0 * rng.standard_normal((3, small_cfg.value_dim, 2, 2)))
        plain = qcim_refine(queries, readout, qw).q.data
        scaled = qcim_refine(queries, readout, qw, scaled=True).q.data
        assert not np.allclose(plain, scaled)

    def test_f16_content(self, queries, rng, small_cfg):
        cfg = small_cfg.model_copy(update={"cross_source": "f16"})
        w = init_querymod_weights(cfg, seeded_rng(0)).bind()
        content = project_f16(Tensor(rng.standard_normal((cfg.c16, 2, 2))), w)
        assert content.shape == (cfg.value_dim, 2, 2)
        assert qcim_refine(queries, content, w).q.shape == queries.q.shape

    def test_object_count_mismatch(self, queries, qw, small_cfg):
        with pytest.raises(ShapeError):
            qcim_refine(queries, Tensor(np.zeros((2, small_cfg.value_dim, 2, 2))), qw)

    def test_empty_content(self, queries, qw, small_cfg):
        with pytest.raises(PreconditionError):
            qcim_refine(queries, Tensor(np.zeros((3, small_cfg.value_dim, 0, 2))), qw)


class TestQueryChain:
    """Fusion, pooling, SIM and QCIM composed."""

    def _inputs(self, rng, cfg):
        f16 = rng.standard_normal((cfg.c16, 2, 2))
        f8 = rng.standard_normal((cfg.c8, 4, 4))
        masks = rng.uniform(0.2, 1.0, size=(2, 8, 8))
        readout = rng.standard_normal((2, cfg.value_dim, 2, 2))
        return f16, f8, masks, readout

    def _chain(self, f16, f8, masks, readout, w):
        x = init_queries(fuse_scales(f16, f8, w), masks)
        return qcim_refine(sim_interact(x, w), readout, w).q

    def test_gradient_wrt_features(self, rng, small_cfg, qw):
        f16, f8, masks, readout = self._inputs(rng, small_cfg)
        readout = Tensor(readout)
        assert grad_check(lambda t: self._chain(Tensor(f16), t, masks, readout, qw), f8) < 1e-5
        assert grad_check(lambda t: self._chain(t, Tensor(f8), masks, readout, qw), f16) < 1e-5

    def test_gradient_wrt_readout(self, rng, small_cfg, qw):
        f16, f8, masks, readout = self._inputs(rng, small_cfg)
        f16, f8 = Tensor(f16), Tensor(f8)
        assert grad_check(lambda t: self._chain(f16, f8, masks, t, qw), readout) < 1e-5


class TestSerializeContent:
    def test_object_major_rows(self):
        readout = np.arange(2 * 3 * 1 * 2, dtype=np.float64).reshape(2, 3, 1, 2)
        rows = serialize_content(Tensor(readout)).data
        assert rows.shape == (4, 3)
        assert_array_equal(rows[0], readout[0, :, 0, 0])
        assert_array_equal(rows[3], readout[1, :, 0, 1])

    def test_frame_features(self):
        f = np.arange(12, dtype=np.float64).reshape(3, 2, 2)
        rows = serialize_content(Tensor(f)).data
        assert_array_equal(rows, f.reshape(3, 4).T)

    def test_bad_rank(self):
        with pytest.raises(ShapeError):
            serialize_content(Tensor(np.zeros((2, 2))))


class TestObjectQuerySet:
    def test_rejects_flag_mismatch(self):
        with pytest.raises(ContractError):
            ObjectQuerySet(q=Tensor(np.zeros((2, 4))), empty_flags=(False,))

    def test_rejects_no_objects(self):
        with pytest.raises(ContractError):
            ObjectQuerySet(q=Tensor(np.zeros((0, 4))), empty_flags=())
