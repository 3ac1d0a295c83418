"""Trainable padding layer that learns to extrapolate an input's borders.

The layer supervises itself: the outermost rows/columns of the input are
the targets, and the rows/columns just inside them are the predictor. Each
channel owns a 1x3 filter that slides (stride 1) over the reflect-then-zero
padded predictor rows to produce border predictions; the squared prediction
error is driven down by a local optimizer, independent of whatever loss the
surrounding network trains on. At padding time the same filters extrapolate
outward one ring at a time from the current outermost border, and the ring
corners average the two predictions (horizontal and vertical) that meet
there.

On the way back, gradients arriving for the padded rings are discarded:
``backward`` updates the filters from the cached supervision pair and passes
only the interior gradient to the previous layer.

Two granularities are exposed:

* module-level functions (``extract_target`` .. ``local_mse_grad``) operate
  on single-channel 2-D matrices and are the reference definitions;
* :class:`PaddingModule` runs the same math vectorized over a batch and all
  channels at once, for use inside a network.
"""

from __future__ import annotations

import struct
import time
from typing import NamedTuple

import numpy as np

from .tensor_core import reflect_pad_1d, zero_pad_1d

WEIGHTS_MAGIC = b"PADMOD1\n"


class BorderBundle(NamedTuple):
    """Four border-related row vectors, in fixed order.

    ``left`` and ``right`` are the corresponding columns transposed into row
    vectors. Top/bottom lengths match, as do left/right lengths.
    """

    top: np.ndarray
    bottom: np.ndarray
    left: np.ndarray
    right: np.ndarray

    @property
    def lengths(self):
        return tuple(len(r) for r in self)


class PredictorBundle(NamedTuple):
    """A BorderBundle after per-row reflection-then-zero padding.

    Each row is 4 longer than its source row and starts/ends with an exact 0.
    """

    top: np.ndarray
    bottom: np.ndarray
    left: np.ndarray
    right: np.ndarray

    @property
    def lengths(self):
        return tuple(len(r) for r in self)


def _require_2d(m, min_h, min_w, what):
    m = np.asarray(m)
    if m.ndim != 2:
        raise ValueError(f"{what} expects a 2-D matrix, got ndim={m.ndim}")
    h, w = m.shape
    if h < min_h or w < min_w:
        raise ValueError(
            f"{what} needs at least {min_h}x{min_w}, got {h}x{w}"
        )
    return m


def extract_target(m):
    """Target borders of a 2-D input: (top row, bottom row, leftT, rightT).

    These are the values the filters learn to predict. Needs >= 4 in both
    dims so the matching predictor rows are non-degenerate.
    """
    m = _require_2d(m, 4, 4, "extract_target")
    return BorderBundle(
        top=m[0, :].copy(),
        bottom=m[-1, :].copy(),
        left=m[:, 0].copy(),
        right=m[:, -1].copy(),
    )


def extract_neighbors(m):
    """Rows/columns adjacent to the borders, with their end entries dropped.

    The end entries overlap the perpendicular borders already covered by the
    target bundle, so they are excluded: lengths are (c-2, c-2, r-2, r-2).
    """
    m = _require_2d(m, 4, 4, "extract_neighbors")
    return BorderBundle(
        top=m[1, 1:-1].copy(),
        bottom=m[-2, 1:-1].copy(),
        left=m[1:-1, 1].copy(),
        right=m[1:-1, -2].copy(),
    )


def extract_borders(m):
    """Full borders of the current (possibly already padded) input.

    Unlike :func:`extract_neighbors` nothing is trimmed; corner values
    appear in both the horizontal and vertical rows.
    """
    m = _require_2d(m, 2, 2, "extract_borders")
    return BorderBundle(
        top=m[0, :].copy(),
        bottom=m[-1, :].copy(),
        left=m[:, 0].copy(),
        right=m[:, -1].copy(),
    )


def build_predictor(b):
    """Reflect-then-zero pad every row of a bundle (each grows by 4)."""
    return PredictorBundle(*(zero_pad_1d(reflect_pad_1d(r)) for r in b))


def _slide_filter_1d(theta, padded_row):
    # valid 1x3 correlation, stride 1: out[j] = t0*x[j] + t1*x[j+1] + t2*x[j+2]
    return (
        theta[0] * padded_row[:-2]
        + theta[1] * padded_row[1:-1]
        + theta[2] * padded_row[2:]
    )


def predict_borders(filters, p, channel):
    """Apply one channel's 1x3 filter to every row of a predictor bundle.

    Each output row is 2 shorter than its input row.
    """
    theta = filters.channel(channel)
    return BorderBundle(*(_slide_filter_1d(theta, r) for r in p))


def assemble_padded(m, o):
    """Wrap one ring of predicted values around a 2-D input.

    ``o`` holds the predictions for the top, bottom, left and right of the
    output; its horizontal rows must be c+2 long and its vertical rows r+2
    long for an r x c input. The corners each receive one horizontal and one
    vertical prediction, added and halved. The interior is the input,
    bit-exact.
    """
    m = _require_2d(m, 1, 1, "assemble_padded")
    h, w = m.shape
    want = (w + 2, w + 2, h + 2, h + 2)
    if o.lengths != want:
        raise ValueError(
            f"prediction lengths {o.lengths} do not fit input {h}x{w}, need {want}"
        )
    out = np.zeros((h + 2, w + 2), dtype=np.result_type(m, o.top))
    out[1:-1, 1:-1] = m
    out[0, :] = o.top
    out[-1, :] = o.bottom
    out[1:-1, 0] = o.left[1:-1]
    out[1:-1, -1] = o.right[1:-1]
    out[0, 0] = (o.top[0] + o.left[0]) / 2
    out[0, -1] = (o.top[-1] + o.right[0]) / 2
    out[-1, 0] = (o.bottom[0] + o.left[-1]) / 2
    out[-1, -1] = (o.bottom[-1] + o.right[-1]) / 2
    return out


def _bundle_residuals(theta, p, t):
    preds = [_slide_filter_1d(theta, pr) for pr in p]
    for pred, tr in zip(preds, t):
        if len(pred) != len(tr):
            raise ValueError(
                f"prediction length {len(pred)} does not match target length {len(tr)}"
            )
    return [pred - tr for pred, tr in zip(preds, t)]


def local_mse(filters, p, t, channel, reduction="mean"):
    """Squared error between filtered predictor rows and target rows.

    ``reduction`` is "mean" (over all terms of all four rows) or "sum".
    """
    if reduction not in ("mean", "sum"):
        raise ValueError(f"unknown reduction {reduction!r}")
    theta = filters.channel(channel)
    residuals = _bundle_residuals(theta, p, t)
    total = sum(float(np.sum(r * r)) for r in residuals)
    if reduction == "sum":
        return total
    return total / sum(len(r) for r in residuals)


def local_mse_grad(filters, p, t, channel):
    """Gradient of the mean-reduced local MSE w.r.t. one channel's filter.

    Component m accumulates 2 * residual * x_m over every sliding window,
    where x_m is the window element that filter weight m multiplies, scaled
    by the same term count the mean in :func:`local_mse` divides by.
    """
    theta = filters.channel(channel)
    residuals = _bundle_residuals(theta, p, t)
    n_terms = sum(len(r) for r in residuals)
    grad = np.zeros(3, dtype=np.result_type(*(r.dtype for r in residuals)))
    for pr, res in zip(p, residuals):
        n = len(res)
        for m in range(3):
            grad[m] += 2.0 * np.dot(res, pr[m : m + n])
    return grad / n_terms


class FilterBank:
    """Per-channel 1x3 filter weights plus their local-optimizer state.

    ``weights`` has shape (channels, 3). ``step`` applies one optimizer
    update given a same-shaped gradient array.
    """

    def __init__(self, channels, learning_rate=0.01, optimizer="sgd",
                 init="mean", seed=None, dtype=np.float32):
        if channels < 1:
            raise ValueError(f"need at least one channel, got {channels}")
        if optimizer not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {optimizer!r}")
        self.channels = int(channels)
        self.learning_rate = float(learning_rate)
        self.optimizer = optimizer
        self.dtype = np.dtype(dtype)
        if init == "mean":
            # start as a local-mean extrapolator
            self.weights = np.full((channels, 3), 1.0, dtype=self.dtype) / 3
        elif init == "uniform":
            rng = np.random.default_rng(seed)
            self.weights = rng.uniform(-0.1, 0.1, size=(channels, 3)).astype(self.dtype)
        else:
            raise ValueError(f"unknown init {init!r}")
        self._m = np.zeros_like(self.weights)
        self._v = np.zeros_like(self.weights)
        self._t = 0

    def channel(self, index):
        if not 0 <= index < self.channels:
            raise IndexError(
                f"channel {index} out of range for {self.channels} filters"
            )
        return self.weights[index]

    def step(self, grads):
        grads = np.asarray(grads, dtype=self.weights.dtype)
        if grads.shape != self.weights.shape:
            raise ValueError(
                f"gradient shape {grads.shape} != weights shape {self.weights.shape}"
            )
        if self.optimizer == "sgd":
            self.weights = self.weights - self.learning_rate * grads
        else:
            self._t += 1
            b1, b2, eps = 0.9, 0.999, 1e-8
            self._m = b1 * self._m + (1 - b1) * grads
            self._v = b2 * self._v + (1 - b2) * grads * grads
            m_hat = self._m / (1 - b1 ** self._t)
            v_hat = self._v / (1 - b2 ** self._t)
            self.weights = self.weights - self.learning_rate * m_hat / (np.sqrt(v_hat) + eps)
        if not np.all(np.isfinite(self.weights)):
            raise FloatingPointError("filter weights diverged to non-finite values")


# --- batched internals -------------------------------------------------------
#
# Border rows are carried as arrays of shape (N, L, C): axis 1 runs along the
# border. This keeps every step a single vectorized numpy op across the batch
# and all channels; the per-channel filters enter through broadcasting.


def _rows_target(x):
    return x[:, 0, :, :], x[:, -1, :, :], x[:, :, 0, :], x[:, :, -1, :]


def _rows_neighbors(x):
    return (
        x[:, 1, 1:-1, :],
        x[:, -2, 1:-1, :],
        x[:, 1:-1, 1, :],
        x[:, 1:-1, -2, :],
    )


def _reflect_zero(rows):
    # (N, L, C) -> (N, L+4, C): mirror one element (excluding the edge), then
    # one zero on each side
    n, length, c = rows.shape
    out = np.zeros((n, length + 4, c), dtype=rows.dtype)
    out[:, 2:-2, :] = rows
    out[:, 1, :] = rows[:, 1, :]
    out[:, -2, :] = rows[:, -2, :]
    return out


def _slide_filter(weights, rows):
    # rows (N, L, C), weights (C, 3) -> (N, L-2, C)
    return (
        weights[:, 0] * rows[:, :-2, :]
        + weights[:, 1] * rows[:, 1:-1, :]
        + weights[:, 2] * rows[:, 2:, :]
    )


def _pair_stats(weights, predictor_rows, target_rows):
    """Per-channel mean MSE and filter gradient over batched row bundles."""
    n = predictor_rows[0].shape[0]
    n_terms = sum(t.shape[1] for t in target_rows)
    channels = weights.shape[0]
    mse = np.zeros(channels, dtype=np.float64)
    grad = np.zeros((channels, 3), dtype=np.float64)
    for p_rows, t_rows in zip(predictor_rows, target_rows):
        res = _slide_filter(weights, p_rows) - t_rows  # (N, L, C)
        mse += np.einsum("nlc,nlc->c", res, res, dtype=np.float64)
        length = t_rows.shape[1]
        for m in range(3):
            grad[:, m] += 2.0 * np.einsum(
                "nlc,nlc->c", res, p_rows[:, m : m + length, :], dtype=np.float64
            )
    return mse / (n_terms * n), grad / (n_terms * n)


def _assemble(x, top, bottom, left, right):
    n, h, w, c = x.shape
    out = np.zeros((n, h + 2, w + 2, c), dtype=np.result_type(x, top))
    out[:, 1:-1, 1:-1, :] = x
    out[:, 0, :, :] = top
    out[:, -1, :, :] = bottom
    out[:, 1:-1, 0, :] = left[:, 1:-1, :]
    out[:, 1:-1, -1, :] = right[:, 1:-1, :]
    out[:, 0, 0, :] = (top[:, 0, :] + left[:, 0, :]) / 2
    out[:, 0, -1, :] = (top[:, -1, :] + right[:, 0, :]) / 2
    out[:, -1, 0, :] = (bottom[:, 0, :] + left[:, -1, :]) / 2
    out[:, -1, -1, :] = (bottom[:, -1, :] + right[:, -1, :]) / 2
    return out


class PaddingModule:
    """Learnable padding layer for (H,W), (H,W,C) or (N,H,W,C) inputs.

    In train mode, ``forward`` caches the supervision pair built from the
    original input; ``backward`` then updates the filters from that cache
    and strips the padded-ring gradients, returning only the interior. In
    eval mode ``forward`` is pure and ``backward`` only strips.

    A frozen module keeps padding but stops collecting supervision and
    updating its filters.
    """

    def __init__(self, channels, pad_size=1, learning_rate=0.01,
                 optimizer="sgd", init="mean", seed=None, dtype=np.float32):
        if pad_size < 1:
            raise ValueError(f"pad_size must be >= 1, got {pad_size}")
        self.filters = FilterBank(channels, learning_rate=learning_rate,
                                  optimizer=optimizer, init=init, seed=seed,
                                  dtype=dtype)
        self.pad_size = int(pad_size)
        self.mode = "train"
        self.frozen = False
        self.cache = None
        self.last_local_mse = float("nan")
        self.seconds = 0.0  # cumulative wall time spent padding/updating
        self._last_output_shape = None

    # -- mode control ---------------------------------------------------------

    def train(self):
        if not self.frozen:
            self.mode = "train"
        return self

    def eval(self):
        self.mode = "eval"
        return self

    def freeze(self):
        """Stop training the filters for the rest of the run."""
        self.frozen = True
        self.mode = "eval"
        self.cache = None
        return self

    def unfreeze(self):
        self.frozen = False
        return self

    # -- shape plumbing -------------------------------------------------------

    def _as_batch(self, x, what):
        x = np.asarray(x)
        if x.ndim == 2:
            x4 = x[None, :, :, None]
        elif x.ndim == 3:
            x4 = x[None, :, :, :]
        elif x.ndim == 4:
            x4 = x
        else:
            raise ValueError(f"{what} expects 2-D..4-D input, got ndim={x.ndim}")
        if x4.shape[3] != self.filters.channels:
            raise ValueError(
                f"{what} got {x4.shape[3]} channels, filter bank has {self.filters.channels}"
            )
        return x4, x.ndim

    # -- forward --------------------------------------------------------------

    def forward(self, x):
        start = time.perf_counter()
        x4, ndim = self._as_batch(x, "forward")
        n, h, w, _ = x4.shape
        min_side = 4 if self.mode == "train" else 2
        if h < min_side or w < min_side:
            raise ValueError(
                f"{self.mode}-mode forward needs H,W >= {min_side}, got {h}x{w}"
            )
        if self.mode == "train":
            # supervision comes from the original input only, never from
            # already-padded rings
            tgt = _rows_target(x4)
            prd = tuple(_reflect_zero(r) for r in _rows_neighbors(x4))
            self.cache = {"predictor": prd, "target": tgt}
        else:
            self.cache = None  # cache tracks the most recent forward only
        out = x4
        # divergence is detected by the finiteness check below, so let any
        # intermediate overflow pass through silently as inf
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(self.pad_size):
                borders = _rows_target(out)
                padded = tuple(_reflect_zero(r) for r in borders)
                preds = tuple(_slide_filter(self.filters.weights, r) for r in padded)
                out = _assemble(out, *preds)
        if not np.all(np.isfinite(out)):
            raise FloatingPointError(
                "padding produced non-finite values (divergent local filters?)"
            )
        if self.mode == "train":
            self._last_output_shape = out.shape
        self.seconds += time.perf_counter() - start
        if ndim == 2:
            return out[0, :, :, 0]
        if ndim == 3:
            return out[0]
        return out

    # -- local training -------------------------------------------------------

    def supervision_mse(self, x):
        """Mean border-prediction MSE of `x` under the current filters.

        Pure measurement: neither the cache nor the filters are touched.
        """
        x4, _ = self._as_batch(x, "supervision_mse")
        if x4.shape[1] < 4 or x4.shape[2] < 4:
            raise ValueError(
                f"supervision needs H,W >= 4, got {x4.shape[1]}x{x4.shape[2]}"
            )
        tgt = _rows_target(x4)
        prd = tuple(_reflect_zero(r) for r in _rows_neighbors(x4))
        mse, _ = _pair_stats(self.filters.weights, prd, tgt)
        return float(mse.mean())

    def local_update(self):
        """One optimizer step on the filters from the cached supervision.

        The per-channel gradient is averaged over the batch the cache was
        built from; the cache is consumed.
        """
        if self.cache is None:
            raise RuntimeError("local_update without a train-mode forward")
        start = time.perf_counter()
        mse, grad = _pair_stats(self.filters.weights, self.cache["predictor"],
                                self.cache["target"])
        self.last_local_mse = float(mse.mean())
        self.filters.step(grad.astype(self.filters.weights.dtype))
        self.cache = None
        self.seconds += time.perf_counter() - start

    def backward(self, g):
        """Strip padded-ring gradients; update filters first in train mode.

        Returns the interior of ``g``, bit-exact: gradients for the rings
        this layer fabricated are discarded, not propagated.
        """
        g4, ndim = self._as_batch(g, "backward")
        if self.mode == "train" and not self.frozen:
            if self.cache is None:
                raise RuntimeError("backward without a train-mode forward")
            if self._last_output_shape is not None and g4.shape != self._last_output_shape:
                raise ValueError(
                    f"gradient shape {g4.shape} != padded output shape {self._last_output_shape}"
                )
            self.local_update()
        s = self.pad_size
        n, h, w, _ = g4.shape
        if h <= 2 * s or w <= 2 * s:
            raise ValueError(
                f"gradient spatial shape {h}x{w} too small to strip {s} rings"
            )
        out = g4[:, s : h - s, s : w - s, :].copy()
        if ndim == 2:
            return out[0, :, :, 0]
        if ndim == 3:
            return out[0]
        return out

    # -- persistence ----------------------------------------------------------

    def save_weights(self, path):
        save_weights(path, self.filters.weights)

    def load_weights(self, path):
        weights = load_weights(path)
        if weights.shape[0] != self.filters.channels:
            raise ValueError(
                f"weights file holds {weights.shape[0]} channels, module has "
                f"{self.filters.channels}"
            )
        self.filters.weights = weights.astype(self.filters.weights.dtype)


def save_weights(path, weights):
    """Write a filter bank: magic, u32-LE channel count, 3 f32-LE per channel."""
    weights = np.asarray(weights)
    if weights.ndim != 2 or weights.shape[1] != 3:
        raise ValueError(f"expected (channels, 3) weights, got {weights.shape}")
    with open(path, "wb") as f:
        f.write(WEIGHTS_MAGIC)
        f.write(struct.pack("<I", weights.shape[0]))
        f.write(weights.astype("<f4").tobytes())


def load_weights(path):
    """Read a filter bank written by :func:`save_weights` -> (channels, 3) f32."""
    with open(path, "rb") as f:
        blob = f.read()
    if not blob.startswith(WEIGHTS_MAGIC):
        raise ValueError(f"{path}: not a padding-filter weights file")
    (channels,) = struct.unpack_from("<I", blob, len(WEIGHTS_MAGIC))
    body = blob[len(WEIGHTS_MAGIC) + 4 :]
    if len(body) != channels * 12:
        raise ValueError(
            f"{path}: expected {channels * 12} payload bytes, found {len(body)}"
        )
    return np.frombuffer(body, dtype="<f4").reshape(channels, 3).copy()
