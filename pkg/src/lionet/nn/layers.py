"""Feed-forward layers with hand-written backward passes.

Tensors are plain numpy arrays laid out ``(batch, time, channel)``.  Every
layer caches what its backward pass needs during ``forward`` and accumulates
parameter gradients into ``Param.grad`` during ``backward``; gradients are
never zeroed implicitly.
"""

from __future__ import annotations

import math

import numpy as np


class Param:
    __slots__ = ("name", "value", "grad")

    def __init__(self, name: str, value: np.ndarray):
        self.name = name
        self.value = value
        self.grad = np.zeros_like(value)

    @property
    def size(self) -> int:
        return int(self.value.size)

    def __repr__(self) -> str:
        return f"Param({self.name!r}, shape={self.value.shape})"


class Layer:
    """Base class: ``forward`` caches, ``backward`` returns the input gradient."""

    def params(self) -> list[Param]:
        return []

    def forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dy: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def zero_grad(self) -> None:
        for p in self.params():
            p.grad[...] = 0.0


def uniform_init(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    bound = math.sqrt(1.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape)


def sigmoid(x: np.ndarray) -> np.ndarray:
    # tanh form never overflows, unlike 1 / (1 + exp(-x))
    return 0.5 * (np.tanh(0.5 * x) + 1.0)


# --------------------------------------------------------------------------
# causal dilated convolution


def _check_conv_shapes(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> None:
    if x.ndim != 3:
        raise ValueError(f"conv input must be (B, T, C), got shape {x.shape}")
    if w.ndim != 3 or w.shape[1] != x.shape[2]:
        raise ValueError(f"conv weight {w.shape} does not match input channels {x.shape[2]}")
    if b.shape != (w.shape[2],):
        raise ValueError(f"conv bias {b.shape} does not match output channels {w.shape[2]}")


def _shifted_columns(x: np.ndarray, kernel: int, dilation: int) -> np.ndarray:
    """Stack ``x[t - j*dilation]`` for ``j < kernel`` along channels, zero-filled."""
    if kernel == 1:
        return x
    B, T, C = x.shape
    cols = np.zeros((B, T, kernel * C), dtype=x.dtype)
    for j in range(kernel):
        s = j * dilation
        if s < T:
            cols[:, s:, j * C:(j + 1) * C] = x[:, : T - s]
    return cols


def conv1d_causal_fwd(x: np.ndarray, w: np.ndarray, b: np.ndarray, dilation: int = 1):
    """Causal dilated 1-D convolution.

    ``y[b, t, o] = bias[o] + sum_{j, c} w[j, c, o] * x[b, t - j*dilation, c]``
    with out-of-range inputs treated as zero.  Returns ``(y, cols)``; ``cols``
    is the im2col buffer needed by :func:`conv1d_causal_bwd`.
    """
    _check_conv_shapes(x, w, b)
    k, C, O = w.shape
    cols = _shifted_columns(x, k, dilation)
    y = cols @ w.reshape(k * C, O) + b
    return y, cols


def conv1d_causal_bwd(dy: np.ndarray, cols: np.ndarray, w: np.ndarray, dilation: int = 1):
    """Exact gradients ``(dx, dw, db)`` of :func:`conv1d_causal_fwd`."""
    k, C, O = w.shape
    B, T, _ = dy.shape
    dw = (cols.reshape(-1, k * C).T @ dy.reshape(-1, O)).reshape(k, C, O)
    db = dy.sum(axis=(0, 1))
    dcols = dy @ w.reshape(k * C, O).T
    if k == 1:
        return dcols, dw, db
    dx = np.zeros((B, T, C), dtype=dy.dtype)
    for j in range(k):
        s = j * dilation
        if s < T:
            dx[:, : T - s] += dcols[:, s:, j * C:(j + 1) * C]
    return dx, dw, db


class CausalConv1d(Layer):
    """Causal dilated convolution; ``kernel=1`` gives a pointwise (1x1) conv."""

    def __init__(self, in_channels: int, out_channels: int, kernel: int = 2, dilation: int = 1,
                 name: str = "conv", rng: np.random.Generator | None = None):
        if min(in_channels, out_channels, kernel, dilation) < 1:
            raise ValueError("conv sizes must be positive")
        rng = rng if rng is not None else np.random.default_rng(0)
        self.in_channels, self.out_channels = in_channels, out_channels
        self.kernel, self.dilation = kernel, dilation
        fan_in = kernel * in_channels
        self.w = Param(f"{name}.w", uniform_init(rng, (kernel, in_channels, out_channels), fan_in))
        self.b = Param(f"{name}.b", uniform_init(rng, (out_channels,), fan_in))
        self._cols = None

    @property
    def receptive_field(self) -> int:
        return (self.kernel - 1) * self.dilation + 1

    def params(self):
        return [self.w, self.b]

    def forward(self, x):
        y, self._cols = conv1d_causal_fwd(x, self.w.value, self.b.value, self.dilation)
        return y

    def backward(self, dy):
        dx, dw, db = conv1d_causal_bwd(dy, self._cols, self.w.value, self.dilation)
        self.w.grad += dw
        self.b.grad += db
        return dx


# --------------------------------------------------------------------------
# gated activation


def gated_activation(xf: np.ndarray, xg: np.ndarray) -> np.ndarray:
    """``tanh(xf) * sigmoid(xg)``, elementwise."""
    if xf.shape != xg.shape:
        raise ValueError(f"filter/gate shapes differ: {xf.shape} vs {xg.shape}")
    return np.tanh(xf) * sigmoid(xg)


def gated_activation_bwd(dz: np.ndarray, xf: np.ndarray, xg: np.ndarray):
    th, sg = np.tanh(xf), sigmoid(xg)
    return dz * sg * (1.0 - th * th), dz * th * sg * (1.0 - sg)


class GatedActivation(Layer):
    """Gated unit over a stacked input: first half of the channels is the
    filter path, second half the gate path."""

    def forward(self, x):
        if x.shape[-1] % 2:
            raise ValueError("gated activation needs an even channel count")
        h = x.shape[-1] // 2
        self._th = np.tanh(x[..., :h])
        self._sg = sigmoid(x[..., h:])
        return self._th * self._sg

    def backward(self, dz):
        th, sg = self._th, self._sg
        return np.concatenate([dz * sg * (1.0 - th * th), dz * th * sg * (1.0 - sg)], axis=-1)


# --------------------------------------------------------------------------
# dense, pooling, relu, loss


def dense_fwd(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    if x.shape[-1] != w.shape[0]:
        raise ValueError(f"dense input width {x.shape[-1]} != weight rows {w.shape[0]}")
    return x @ w + b


def dense_bwd(dy: np.ndarray, x: np.ndarray, w: np.ndarray):
    n_in, n_out = w.shape
    dw = x.reshape(-1, n_in).T @ dy.reshape(-1, n_out)
    db = dy.reshape(-1, n_out).sum(axis=0)
    return dy @ w.T, dw, db


class Dense(Layer):
    def __init__(self, n_in: int, n_out: int, name: str = "dense",
                 rng: np.random.Generator | None = None, zero: bool = False):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.n_in, self.n_out = n_in, n_out
        if zero:
            w, b = np.zeros((n_in, n_out)), np.zeros(n_out)
        else:
            w, b = uniform_init(rng, (n_in, n_out), n_in), uniform_init(rng, (n_out,), n_in)
        self.w = Param(f"{name}.w", w)
        self.b = Param(f"{name}.b", b)

    def params(self):
        return [self.w, self.b]

    def forward(self, x):
        self._x = x
        return dense_fwd(x, self.w.value, self.b.value)

    def backward(self, dy):
        dx, dw, db = dense_bwd(dy, self._x, self.w.value)
        self.w.grad += dw
        self.b.grad += db
        return dx


def global_avg_pool(x: np.ndarray) -> np.ndarray:
    """Average over the time axis: ``(B, T, C) -> (B, C)``."""
    if x.ndim != 3:
        raise ValueError(f"pool input must be (B, T, C), got {x.shape}")
    return x.mean(axis=1)


def global_avg_pool_bwd(dy: np.ndarray, T: int) -> np.ndarray:
    return np.repeat(dy[:, None, :] / T, T, axis=1)


class GlobalAvgPool(Layer):
    def forward(self, x):
        self._T = x.shape[1]
        return global_avg_pool(x)

    def backward(self, dy):
        return global_avg_pool_bwd(dy, self._T)


class ReLU(Layer):
    def forward(self, x):
        self._mask = x > 0
        return x * self._mask

    def backward(self, dy):
        return dy * self._mask


def mse_loss(pred: np.ndarray, target: np.ndarray):
    """Mean squared error over batch and output dims; returns ``(loss, dpred)``."""
    if pred.shape != target.shape:
        raise ValueError(f"pred {pred.shape} and target {target.shape} differ")
    diff = pred - target
    return float(np.mean(diff * diff)), 2.0 * diff / diff.size


def param_count(obj) -> int:
    """Total number of scalar parameters of a layer or model."""
    return sum(p.size for p in obj.params())
