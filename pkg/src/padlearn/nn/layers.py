"""Minimal CNN layers over (N, H, W, C) arrays, with exact analytic backward.

Every layer caches what its backward pass needs during forward. Convolution
is valid cross-correlation after the attached padding strategy has run; its
input gradient flows back through the same strategy, which for all supported
paddings passes only the interior gradient upstream.
"""

from __future__ import annotations

import numpy as np


class ZeroPad:
    """Static zero padding with the same forward/backward surface as the
    learnable module: backward keeps only the interior gradient (exact, since
    the zero rings receive none of the input)."""

    def __init__(self, pad_size):
        self.pad_size = int(pad_size)

    def forward(self, x):
        s = self.pad_size
        if s == 0:
            return x
        return np.pad(x, ((0, 0), (s, s), (s, s), (0, 0)), mode="constant")

    def backward(self, g):
        s = self.pad_size
        if s == 0:
            return g
        return g[:, s:-s, s:-s, :]


def _im2col(xp, k):
    # (N, Hp, Wp, C) -> (N*Ho*Wo, k*k*C), window-major rows
    n, hp, wp, c = xp.shape
    ho, wo = hp - k + 1, wp - k + 1
    cols = np.empty((n, ho, wo, k, k, c), dtype=xp.dtype)
    for i in range(k):
        for j in range(k):
            cols[:, :, :, i, j, :] = xp[:, i : i + ho, j : j + wo, :]
    return cols.reshape(n * ho * wo, k * k * c), ho, wo


def _col2im(dcols, shape, k, ho, wo):
    n, hp, wp, c = shape
    dxp = np.zeros(shape, dtype=dcols.dtype)
    d6 = dcols.reshape(n, ho, wo, k, k, c)
    for i in range(k):
        for j in range(k):
            dxp[:, i : i + ho, j : j + wo, :] += d6[:, :, :, i, j, :]
    return dxp


class Conv2D:
    """k x k convolution, stride 1, with an attached padding strategy.

    `padding` is any object with forward/backward (ZeroPad or a
    PaddingModule); it runs before the valid cross-correlation, and the
    input gradient is routed back through it.
    """

    def __init__(self, in_channels, out_channels, padding, kernel_size=3,
                 rng=None, dtype=np.float32):
        if kernel_size % 2 != 1:
            raise ValueError(f"kernel size must be odd, got {kernel_size}")
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.k = kernel_size
        self.padding = padding
        rng = rng or np.random.default_rng()
        fan_in = kernel_size * kernel_size * in_channels
        self.w = (rng.normal(0.0, 1.0, size=(kernel_size, kernel_size,
                                             in_channels, out_channels))
                  * np.sqrt(2.0 / fan_in)).astype(dtype)
        self.b = np.zeros(out_channels, dtype=dtype)
        self.dw = None
        self.db = None
        self._cols = None
        self._xp_shape = None
        self._out_hw = None

    def forward(self, x):
        if x.shape[3] != self.in_channels:
            raise ValueError(
                f"expected {self.in_channels} input channels, got {x.shape[3]}"
            )
        xp = self.padding.forward(x)
        cols, ho, wo = _im2col(xp, self.k)
        y = cols @ self.w.reshape(-1, self.out_channels) + self.b
        self._cols = cols
        self._xp_shape = xp.shape
        self._out_hw = (ho, wo)
        return y.reshape(x.shape[0], ho, wo, self.out_channels)

    def backward(self, dy):
        if self._cols is None:
            raise RuntimeError("backward before forward")
        ho, wo = self._out_hw
        dy_flat = dy.reshape(-1, self.out_channels)
        self.dw = (self._cols.T @ dy_flat).reshape(self.w.shape)
        self.db = dy_flat.sum(axis=0)
        dcols = dy_flat @ self.w.reshape(-1, self.out_channels).T
        dxp = _col2im(dcols, self._xp_shape, self.k, ho, wo)
        return self.padding.backward(dxp)

    def params(self):
        return [self.w, self.b]

    def grads(self):
        return [self.dw, self.db]

    def set_params(self, values):
        self.w, self.b = values


class ReLU:
    def forward(self, x):
        self._mask = x > 0
        return np.where(self._mask, x, 0)

    def backward(self, dy):
        return np.where(self._mask, dy, 0)

    def params(self):
        return []

    def grads(self):
        return []


class MaxPool2x2:
    """2x2 max pooling, stride 2; backward routes to the first argmax."""

    def forward(self, x):
        n, h, w, c = x.shape
        if h % 2 or w % 2:
            raise ValueError(f"spatial dims must be even, got {h}x{w}")
        blocks = x.reshape(n, h // 2, 2, w // 2, 2, c)
        flat = blocks.transpose(0, 1, 3, 5, 2, 4).reshape(n, h // 2, w // 2, c, 4)
        self._argmax = flat.argmax(axis=-1)
        self._in_shape = x.shape
        return np.take_along_axis(flat, self._argmax[..., None], axis=-1)[..., 0]

    def backward(self, dy):
        n, h, w, c = self._in_shape
        routed = np.zeros((n, h // 2, w // 2, c, 4), dtype=dy.dtype)
        np.put_along_axis(routed, self._argmax[..., None], dy[..., None], axis=-1)
        blocks = routed.reshape(n, h // 2, w // 2, c, 2, 2).transpose(0, 1, 4, 2, 5, 3)
        return blocks.reshape(n, h, w, c)

    def params(self):
        return []

    def grads(self):
        return []


class Flatten:
    def forward(self, x):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dy):
        return dy.reshape(self._shape)

    def params(self):
        return []

    def grads(self):
        return []


class Dense:
    def __init__(self, in_features, out_features, rng=None, dtype=np.float32):
        rng = rng or np.random.default_rng()
        self.w = (rng.normal(0.0, 1.0, size=(in_features, out_features))
                  * np.sqrt(2.0 / in_features)).astype(dtype)
        self.b = np.zeros(out_features, dtype=dtype)
        self.dw = None
        self.db = None

    def forward(self, x):
        self._x = x
        return x @ self.w + self.b

    def backward(self, dy):
        self.dw = self._x.T @ dy
        self.db = dy.sum(axis=0)
        return dy @ self.w.T

    def params(self):
        return [self.w, self.b]

    def grads(self):
        return [self.dw, self.db]

    def set_params(self, values):
        self.w, self.b = values


def softmax_xent(logits, labels):
    """Mean cross-entropy over the batch and its gradient w.r.t. logits."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    probs = exp / exp.sum(axis=1, keepdims=True)
    n = logits.shape[0]
    picked = probs[np.arange(n), labels]
    loss = float(-np.log(np.maximum(picked, 1e-300)).mean())
    dlogits = probs.copy()
    dlogits[np.arange(n), labels] -= 1.0
    dlogits /= n
    return loss, dlogits.astype(logits.dtype)
