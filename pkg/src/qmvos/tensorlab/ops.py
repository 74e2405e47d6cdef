"""
Differentiable tensor operations.

Every primitive computes its forward value with numpy and, when any input is
attached to a Tape, records a vector-Jacobian product closure. Layer-sized
primitives (ffn, attention_layer, residual_layer_norm) keep tape and Python
overhead low in the query modules. Composite ops (cross_entropy,
multi_head_attention) are built from primitives.

All reductions run in numpy's fixed order, so identical inputs give bitwise
identical outputs.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from functools import lru_cache

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from qmvos.core.exceptions import ContractError, PreconditionError, ShapeError
from qmvos.tensorlab.tensor import Tape, Tensor, Vjp

LAYER_NORM_EPS = 1e-5

Axis = int | tuple[int, ...] | None


def constant(value: Tensor | np.ndarray | float) -> Tensor:
    """Wrap a value as an untracked tensor."""
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def _tape_of(op: str, inputs: tuple[Tensor, ...]) -> Tape | None:
    tape = None
    for t in inputs:
        if t.tape is not None:
            if tape is None:
                tape = t.tape
            elif t.tape is not tape:
                raise ContractError(op, "inputs are recorded on different tapes")
    return tape


def _emit(
    op: str,
    out: np.ndarray,
    inputs: tuple[Tensor, ...],
    vjp: Vjp,
    kinks: np.ndarray | None = None,
) -> Tensor:
    tape = _tape_of(op, inputs)
    result = Tensor._wrap(out, tape)
    if tape is not None:
        tape.record(op, inputs, result, vjp, kinks)
    return result


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to `shape`."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for i, n in enumerate(shape):
        if n == 1 and g.shape[i] != 1:
            g = g.sum(axis=i, keepdims=True)
    return g


def _broadcast_shape(op: str, a: Tensor, b: Tensor) -> None:
    if a.shape == b.shape:
        return
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError as e:
        raise ShapeError(op, f"cannot broadcast {a.shape} with {b.shape}") from e


def _check_axis(op: str, x: Tensor, axis: int) -> int:
    if not -x.ndim <= axis < x.ndim:
        raise ShapeError(op, f"axis {axis} out of range for rank {x.ndim}")
    return axis % x.ndim


# === Elementwise ===


def add(a: Tensor | float, b: Tensor | float) -> Tensor:
    a, b = constant(a), constant(b)
    _broadcast_shape("add", a, b)

    def vjp(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _emit("add", a.data + b.data, (a, b), vjp)


def sub(a: Tensor | float, b: Tensor | float) -> Tensor:
    a, b = constant(a), constant(b)
    _broadcast_shape("sub", a, b)

    def vjp(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return _emit("sub", a.data - b.data, (a, b), vjp)


def mul(a: Tensor | float, b: Tensor | float) -> Tensor:
    a, b = constant(a), constant(b)
    _broadcast_shape("mul", a, b)

    def vjp(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return _emit("mul", a.data * b.data, (a, b), vjp)


def div(a: Tensor | float, b: Tensor | float) -> Tensor:
    a, b = constant(a), constant(b)
    _broadcast_shape("div", a, b)
    out = a.data / b.data

    def vjp(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return _unbroadcast(g / b.data, a.shape), _unbroadcast(-g * out / b.data, b.shape)

    return _emit("div", out, (a, b), vjp)


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0

    def vjp(g: np.ndarray) -> tuple[np.ndarray]:
        return (g * mask,)

    return _emit("relu", np.where(mask, x.data, 0.0), (x,), vjp, kinks=mask)


# === Reductions and layout ===


def sum(x: Tensor, axis: Axis = None, keepdims: bool = False) -> Tensor:  # noqa: A001
    out = np.sum(x.data, axis=axis, keepdims=keepdims)

    def vjp(g: np.ndarray) -> tuple[np.ndarray]:
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.shape),)

    return _emit("sum", np.asarray(out), (x,), vjp)


def mean(x: Tensor, axis: Axis = None, keepdims: bool = False) -> Tensor:
    out = np.mean(x.data, axis=axis, keepdims=keepdims)
    count = x.size // max(1, np.asarray(out).size)

    def vjp(g: np.ndarray) -> tuple[np.ndarray]:
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g / count, x.shape),)

    return _emit("mean", np.asarray(out), (x,), vjp)


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    try:
        out = x.data.reshape(tuple(shape))
    except ValueError as e:
        raise ShapeError("reshape", f"cannot reshape {x.shape} to {tuple(shape)}") from e

    def vjp(g: np.ndarray) -> tuple[np.ndarray]:
        return (g.reshape(x.shape),)

    return _emit("reshape", out, (x,), vjp)


def transpose(x: Tensor, axes: Sequence[int] | None = None) -> Tensor:
    axes = tuple(range(x.ndim))[::-1] if axes is None else tuple(axes)
    if sorted(axes) != list(range(x.ndim)):
        raise ShapeError("transpose", f"axes {axes} are not a permutation of rank {x.ndim}")
    inverse = tuple(np.argsort(axes))

    def vjp(g: np.ndarray) -> tuple[np.ndarray]:
        return (g.transpose(inverse),)

    return _emit("transpose", x.data.transpose(axes), (x,), vjp)


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    if not tensors:
        raise ShapeError("concat", "nothing to concatenate")
    inputs = tuple(tensors)
    axis = _check_axis("concat", inputs[0], axis)
    try:
        out = np.concatenate([t.data for t in inputs], axis=axis)
    except ValueError as e:
        raise ShapeError("concat", str(e)) from e
    splits = np.cumsum([t.shape[axis] for t in inputs])[:-1]

    def vjp(g: np.ndarray) -> tuple[np.ndarray, ...]:
        return tuple(np.split(g, splits, axis=axis))

    return _emit("concat", out, inputs, vjp)


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    if not tensors:
        raise ShapeError("stack", "nothing to stack")
    inputs = tuple(tensors)
    try:
        out = np.stack([t.data for t in inputs], axis=axis)
    except ValueError as e:
        raise ShapeError("stack", str(e)) from e

    def vjp(g: np.ndarray) -> tuple[np.ndarray, ...]:
        return tuple(np.take(g, i, axis=axis) for i in range(len(inputs)))

    return _emit("stack", out, inputs, vjp)


def index(x: Tensor, idx: int | slice | tuple[int | slice, ...]) -> Tensor:
    """Basic (int/slice) indexing."""
    out = x.data[idx]

    def vjp(g: np.ndarray) -> tuple[np.ndarray]:
        full = np.zeros(x.shape)
        full[idx] = g
        return (full,)

    return _emit("index", np.array(out), (x,), vjp)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError("matmul", f"expected matrices, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError("matmul", f"inner dimensions differ: {a.shape} @ {b.shape}")

    def vjp(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return g @ b.data.T, a.data.T @ g

    return _emit("matmul", a.data @ b.data, (a, b), vjp)


# === Normalisation ===


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    """Numerically stable softmax (max-subtraction) along `axis`."""
    axis = _check_axis("softmax", x, axis)
    z = x.data - np.max(x.data, axis=axis, keepdims=True)
    e = np.exp(z)
    out = e / np.sum(e, axis=axis, keepdims=True)

    def vjp(g: np.ndarray) -> tuple[np.ndarray]:
        return (out * (g - np.sum(g * out, axis=axis, keepdims=True)),)

    return _emit("softmax", out, (x,), vjp)


def log_softmax(x: Tensor, axis: int = -1) -> Tensor:
    axis = _check_axis("log_softmax", x, axis)
    z = x.data - np.max(x.data, axis=axis, keepdims=True)
    out = z - np.log(np.sum(np.exp(z), axis=axis, keepdims=True))

    def vjp(g: np.ndarray) -> tuple[np.ndarray]:
        return (g - np.exp(out) * np.sum(g, axis=axis, keepdims=True),)

    return _emit("log_softmax", out, (x,), vjp)


def _normalise(
    op: str, data: np.ndarray, gamma: Tensor, beta: Tensor, eps: float
) -> tuple[np.ndarray, Callable[[np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]]]:
    """Layer-norm forward on raw values; returns the output and its VJP."""
    d = data.shape[-1]
    if gamma.shape != (d,) or beta.shape != (d,):
        raise ShapeError(
            op, f"affine shapes {gamma.shape}/{beta.shape} do not match last axis {d}"
        )
    centered = data - np.mean(data, axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(np.mean(centered * centered, axis=-1, keepdims=True) + eps)
    xhat = centered * inv_std

    def vjp(g: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        gx = g * gamma.data
        dx = inv_std * (
            gx
            - np.mean(gx, axis=-1, keepdims=True)
            - xhat * np.mean(gx * xhat, axis=-1, keepdims=True)
        )
        return dx, (g * xhat).reshape(-1, d).sum(axis=0), g.reshape(-1, d).sum(axis=0)

    return xhat * gamma.data + beta.data, vjp


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = LAYER_NORM_EPS) -> Tensor:
    """Normalise over the last axis, then apply the affine (gamma, beta)."""
    out, norm_vjp = _normalise("layer_norm", x.data, gamma, beta, eps)
    return _emit("layer_norm", out, (x, gamma, beta), norm_vjp)


def residual_layer_norm(
    x: Tensor, residual: Tensor, gamma: Tensor, beta: Tensor, eps: float = LAYER_NORM_EPS
) -> Tensor:
    """layer_norm(x + residual) recorded as a single op."""
    if x.shape != residual.shape:
        raise ShapeError("residual_layer_norm", f"{x.shape} != residual {residual.shape}")
    out, norm_vjp = _normalise("residual_layer_norm", x.data + residual.data, gamma, beta, eps)

    def vjp(g: np.ndarray) -> tuple[np.ndarray, ...]:
        dx, dg, db = norm_vjp(g)
        return dx, dx, dg, db

    return _emit("residual_layer_norm", out, (x, residual, gamma, beta), vjp)


# === Layers ===


def linear(x: Tensor, w: Tensor, b: Tensor | None = None) -> Tensor:
    """y = xW + b for row-major x (rows x in), W (in x out), b (out,)."""
    if x.ndim != 2 or w.ndim != 2 or x.shape[1] != w.shape[0]:
        raise ShapeError("linear", f"cannot apply weight {w.shape} to input {x.shape}")
    if b is not None and b.shape != (w.shape[1],):
        raise ShapeError("linear", f"bias {b.shape} does not match {w.shape[1]} outputs")
    out = x.data @ w.data
    if b is not None:
        out = out + b.data
        inputs: tuple[Tensor, ...] = (x, w, b)
    else:
        inputs = (x, w)

    def vjp(g: np.ndarray) -> tuple[np.ndarray, ...]:
        grads = (g @ w.data.T, x.data.T @ g)
        return grads + (g.sum(axis=0),) if b is not None else grads

    return _emit("linear", out, inputs, vjp)


def conv1x1(x: Tensor, w: Tensor, b: Tensor | None = None) -> Tensor:
    """Per-pixel linear map: x (C, H, W), w (C', C), b (C',) -> (C', H, W)."""
    if x.ndim != 3 or w.ndim != 2 or w.shape[1] != x.shape[0]:
        raise ShapeError("conv1x1", f"weight {w.shape} does not match input {x.shape}")
    if b is not None and b.shape != (w.shape[0],):
        raise ShapeError("conv1x1", f"bias {b.shape} does not match {w.shape[0]} channels")
    c, h, wd = x.shape
    flat = x.data.reshape(c, h * wd)
    out = w.data @ flat
    if b is not None:
        out = out + b.data[:, None]
        inputs: tuple[Tensor, ...] = (x, w, b)
    else:
        inputs = (x, w)

    def vjp(g: np.ndarray) -> tuple[np.ndarray, ...]:
        g2 = g.reshape(w.shape[0], h * wd)
        grads = ((w.data.T @ g2).reshape(x.shape), g2 @ flat.T)
        return grads + (g2.sum(axis=1),) if b is not None else grads

    return _emit("conv1x1", out.reshape(w.shape[0], h, wd), inputs, vjp)


def conv2d(
    x: Tensor, w: Tensor, b: Tensor | None = None, *, stride: int = 1, padding: int = 0
) -> Tensor:
    """Square-kernel convolution: x (C, H, W), w (C', C, k, k) -> (C', H', W')."""
    if x.ndim != 3 or w.ndim != 4 or w.shape[1] != x.shape[0] or w.shape[2] != w.shape[3]:
        raise ShapeError("conv2d", f"weight {w.shape} does not match input {x.shape}")
    if b is not None and b.shape != (w.shape[0],):
        raise ShapeError("conv2d", f"bias {b.shape} does not match {w.shape[0]} channels")
    c, h, wd = x.shape
    c_out, k = w.shape[0], w.shape[2]
    hp, wp = h + 2 * padding, wd + 2 * padding
    if hp < k or wp < k:
        raise ShapeError("conv2d", f"kernel {k} larger than padded input {(hp, wp)}")
    ho, wo = (hp - k) // stride + 1, (wp - k) // stride + 1

    xp = np.pad(x.data, ((0, 0), (padding, padding), (padding, padding))) if padding else x.data
    windows = sliding_window_view(xp, (k, k), axis=(1, 2))[:, ::stride, ::stride]
    cols = windows.transpose(0, 3, 4, 1, 2).reshape(c * k * k, ho * wo)
    w_mat = w.data.reshape(c_out, c * k * k)
    out = (w_mat @ cols).reshape(c_out, ho, wo)
    if b is not None:
        out = out + b.data[:, None, None]
        inputs: tuple[Tensor, ...] = (x, w, b)
    else:
        inputs = (x, w)

    def vjp(g: np.ndarray) -> tuple[np.ndarray, ...]:
        g2 = g.reshape(c_out, ho * wo)
        d_cols = (w_mat.T @ g2).reshape(c, k, k, ho, wo)
        d_xp = np.zeros((c, hp, wp))
        for i in range(k):
            for j in range(k):
                rows = slice(i, i + stride * (ho - 1) + 1, stride)
                cols_ = slice(j, j + stride * (wo - 1) + 1, stride)
                d_xp[:, rows, cols_] += d_cols[:, i, j]
        d_x = d_xp[:, padding : padding + h, padding : padding + wd]
        grads = (d_x, (g2 @ cols.T).reshape(w.shape))
        return grads + (g2.sum(axis=1),) if b is not None else grads

    return _emit("conv2d", out, inputs, vjp)


@lru_cache(maxsize=64)
def _interp_matrix(size: int, factor: int) -> np.ndarray:
    """Align-corners-false linear interpolation matrix of shape (size*factor, size)."""
    out = size * factor
    mat = np.zeros((out, size))
    for o in range(out):
        src = max((o + 0.5) / factor - 0.5, 0.0)
        i0 = min(int(math.floor(src)), size - 1)
        i1 = min(i0 + 1, size - 1)
        lam = src - i0
        mat[o, i0] += 1.0 - lam
        mat[o, i1] += lam
    mat.setflags(write=False)
    return mat


def upsample_bilinear(x: Tensor, factor: int) -> Tensor:
    """Bilinear upsampling of (C, H, W) by an integer factor, align_corners=False."""
    if x.ndim != 3 or factor < 1:
        raise ShapeError("upsample_bilinear", f"expected (C, H, W) and factor >= 1, got {x.shape}")
    a_h = _interp_matrix(x.shape[1], factor)
    a_w = _interp_matrix(x.shape[2], factor)

    def vjp(g: np.ndarray) -> tuple[np.ndarray]:
        return (a_h.T @ g @ a_w,)

    return _emit("upsample_bilinear", a_h @ x.data @ a_w.T, (x,), vjp)


def bilinear_upsample2x(x: Tensor) -> Tensor:
    return upsample_bilinear(x, 2)


def avg_pool(x: Tensor, factor: int) -> Tensor:
    """Area downsampling of (C, H, W) by an integer factor."""
    if x.ndim != 3 or x.shape[1] % factor or x.shape[2] % factor:
        raise ShapeError("avg_pool", f"extents of {x.shape} are not divisible by {factor}")
    c, h, w = x.shape
    out = x.data.reshape(c, h // factor, factor, w // factor, factor).mean(axis=(2, 4))
    area = float(factor * factor)

    def vjp(g: np.ndarray) -> tuple[np.ndarray]:
        return (np.repeat(np.repeat(g, factor, axis=1), factor, axis=2) / area,)

    return _emit("avg_pool", out, (x,), vjp)


# === Attention ===


def _attention_weights(q: np.ndarray, k: np.ndarray, scale: float) -> np.ndarray:
    logits = (q @ k.T) * scale
    e = np.exp(logits - np.max(logits, axis=1, keepdims=True))
    return e / np.sum(e, axis=1, keepdims=True)


def _attention_logit_grad(
    g: np.ndarray, weights: np.ndarray, v: np.ndarray, scale: float
) -> np.ndarray:
    """Gradient w.r.t. the unscaled logits QK^T, given the output gradient."""
    d_weights = g @ v.T
    return weights * (d_weights - np.sum(d_weights * weights, axis=1, keepdims=True)) * scale


def scaled_dot_attention(q: Tensor, k: Tensor, v: Tensor, scale_by_sqrt_d: bool = True) -> Tensor:
    """
    Softmax(QK^T / sqrt(d)) V, or Softmax(QK^T) V when unscaled.

    Args:
        q: (n, d) queries
        k: (m, d) keys
        v: (m, dv) values
        scale_by_sqrt_d: Divide logits by sqrt(d)

    Returns:
        (n, dv); every row is a convex combination of v's rows
    """
    if q.ndim != 2 or k.ndim != 2 or v.ndim != 2:
        raise ShapeError("attention", f"expected matrices, got {q.shape}, {k.shape}, {v.shape}")
    if k.shape[0] == 0:
        raise PreconditionError("attention", "empty key set")
    if q.shape[1] != k.shape[1]:
        raise ShapeError("attention", f"query width {q.shape[1]} != key width {k.shape[1]}")
    if v.shape[0] != k.shape[0]:
        raise ShapeError("attention", f"{v.shape[0]} values for {k.shape[0]} keys")

    scale = 1.0 / math.sqrt(q.shape[1]) if scale_by_sqrt_d else 1.0
    weights = _attention_weights(q.data, k.data, scale)

    def vjp(g: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        d_logits = _attention_logit_grad(g, weights, v.data, scale)
        return d_logits @ k.data, d_logits.T @ q.data, weights.T @ g

    return _emit("attention", weights @ v.data, (q, k, v), vjp)


def attention_layer(
    x: Tensor,
    memory: Tensor,
    wq: Tensor,
    wk: Tensor,
    wv: Tensor,
    scale_by_sqrt_d: bool = True,
) -> Tensor:
    """
    Single-head attention with its bias-free projections, recorded as one op.

    Equals scaled_dot_attention(x @ wq, memory @ wk, memory @ wv). Pass the
    same tensor as `x` and `memory` for self-attention.

    Args:
        x: (n, c) rows that query
        memory: (m, c') rows attended over
        wq: (c, d), wk: (c', d), wv: (c', dv) projections
        scale_by_sqrt_d: Divide logits by sqrt(d)
    """
    if x.ndim != 2 or memory.ndim != 2:
        raise ShapeError("attention", f"expected matrices, got {x.shape} and {memory.shape}")
    if memory.shape[0] == 0:
        raise PreconditionError("attention", "empty key set")
    if wq.shape[0] != x.shape[1] or wk.shape[0] != memory.shape[1] or wq.shape[1] != wk.shape[1]:
        raise ShapeError("attention", f"projections {wq.shape}/{wk.shape} do not fit the inputs")
    if wv.shape[0] != memory.shape[1]:
        raise ShapeError("attention", f"value projection {wv.shape} does not fit {memory.shape}")

    scale = 1.0 / math.sqrt(wq.shape[1]) if scale_by_sqrt_d else 1.0
    q = x.data @ wq.data
    k = memory.data @ wk.data
    v = memory.data @ wv.data
    weights = _attention_weights(q, k, scale)

    def vjp(g: np.ndarray) -> tuple[np.ndarray, ...]:
        d_logits = _attention_logit_grad(g, weights, v, scale)
        d_q, d_k, d_v = d_logits @ k, d_logits.T @ q, weights.T @ g
        return (
            d_q @ wq.data.T,
            d_k @ wk.data.T + d_v @ wv.data.T,
            x.data.T @ d_q,
            memory.data.T @ d_k,
            memory.data.T @ d_v,
        )

    return _emit("attention_layer", weights @ v, (x, memory, wq, wk, wv), vjp)


def multi_head_attention(
    q: Tensor, k: Tensor, v: Tensor, heads: int = 1, scale_by_sqrt_d: bool = True
) -> Tensor:
    """Split channels into `heads` groups, attend per group, concatenate."""
    if heads == 1:
        return scaled_dot_attention(q, k, v, scale_by_sqrt_d)
    if q.shape[1] % heads or v.shape[1] % heads:
        raise ShapeError("attention", f"{heads} heads do not divide {q.shape[1]}/{v.shape[1]}")
    dq, dv = q.shape[1] // heads, v.shape[1] // heads
    outputs = []
    for h in range(heads):
        cols_q = (slice(None), slice(h * dq, (h + 1) * dq))
        cols_v = (slice(None), slice(h * dv, (h + 1) * dv))
        q_h, k_h, v_h = index(q, cols_q), index(k, cols_q), index(v, cols_v)
        outputs.append(scaled_dot_attention(q_h, k_h, v_h, scale_by_sqrt_d))
    return concat(outputs, axis=1)


# === Feed-forward ===


def ffn(x: Tensor, w1: Tensor, b1: Tensor, w2: Tensor, b2: Tensor) -> Tensor:
    """Two fully connected layers with a ReLU between them, recorded as one op."""
    if x.ndim != 2 or w1.ndim != 2 or w2.ndim != 2 or x.shape[1] != w1.shape[0]:
        raise ShapeError("ffn", f"cannot apply weight {w1.shape} to input {x.shape}")
    if w2.shape[0] != w1.shape[1] or b1.shape != (w1.shape[1],) or b2.shape != (w2.shape[1],):
        raise ShapeError(
            "ffn", f"layers {w1.shape}+{b1.shape} -> {w2.shape}+{b2.shape} do not chain"
        )
    pre = x.data @ w1.data + b1.data
    mask = pre > 0
    hidden = np.where(mask, pre, 0.0)

    def vjp(g: np.ndarray) -> tuple[np.ndarray, ...]:
        d_pre = (g @ w2.data.T) * mask
        return (
            d_pre @ w1.data.T,
            x.data.T @ d_pre,
            d_pre.sum(axis=0),
            hidden.T @ g,
            g.sum(axis=0),
        )

    return _emit("ffn", hidden @ w2.data + b2.data, (x, w1, b1, w2, b2), vjp, kinks=mask)


# === Composites ===


def cross_entropy(logits: Tensor, targets: np.ndarray, axis: int = 0) -> Tensor:
    """
    Mean cross-entropy between softmax(logits) and (soft) target distributions.

    Args:
        logits: Class scores; `axis` indexes classes
        targets: Same shape as logits, non-negative, summing to 1 along `axis`
    """
    if targets.shape != logits.shape:
        raise ShapeError("cross_entropy", f"targets {targets.shape} != logits {logits.shape}")
    positions = logits.size // logits.shape[axis]
    total = sum(mul(log_softmax(logits, axis=axis), constant(targets)))
    return mul(total, -1.0 / positions)
