"""Finite-difference verification of every analytic gradient in the stack.

Central differences with a fixed step in double precision, compared
per-component against the analytic gradients. The padding filter loss is
quadratic in the filter weights, so agreement there is limited only by
roundoff; the end-to-end network case goes through the softmax and carries
genuine truncation error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..padding_module import FilterBank, build_predictor, extract_neighbors, \
    extract_target, local_mse, local_mse_grad
from .layers import Conv2D, Dense, Flatten, MaxPool2x2, ReLU, ZeroPad, softmax_xent

DEFAULT_STEP = 1e-4


@dataclass
class GradCheckCase:
    name: str
    max_rel_err: float


@dataclass
class GradCheckReport:
    cases: list

    @property
    def max_rel_err(self):
        return max(c.max_rel_err for c in self.cases)

    @property
    def worst(self):
        return max(self.cases, key=lambda c: c.max_rel_err)

    def passed(self, tol):
        return self.max_rel_err <= tol

    def summary(self, tol):
        worst = self.worst
        status = "PASS" if self.passed(tol) else "FAIL"
        return (f"{status}: {len(self.cases)} gradient checks, max rel err "
                f"{self.max_rel_err:.3e} (worst: {worst.name}) vs tol {tol:g}")


def rel_err(analytic, numeric):
    """Per-component |a-n| / max(|a|, |n|); exact zeros agree exactly."""
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-12)
    return float((np.abs(a - n) / denom).max()) if a.size else 0.0


def numeric_grad(fn, arr, step=DEFAULT_STEP):
    """Central-difference gradient of scalar `fn()` w.r.t. `arr` (in place)."""
    grad = np.zeros(arr.shape, dtype=np.float64)
    flat = arr.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        up = fn()
        flat[i] = orig - step
        down = fn()
        flat[i] = orig
        gflat[i] = (up - down) / (2.0 * step)
    return grad


def finite_diff_check(fn, checks, step=DEFAULT_STEP):
    """Compare analytic gradients against central differences of `fn`.

    `checks` is a list of (name, array, analytic_gradient); arrays are
    perturbed in place and restored.
    """
    cases = []
    for name, arr, analytic in checks:
        numeric = numeric_grad(fn, arr, step)
        cases.append(GradCheckCase(name, rel_err(analytic, numeric)))
    return GradCheckReport(cases)


def module_gradient_suite(trials=100, seed=0, step=DEFAULT_STEP):
    """Filter-loss gradients on random inputs and filters, double precision."""
    rng = np.random.default_rng(seed)
    cases = []
    for trial in range(trials):
        h = int(rng.integers(4, 9))
        w = int(rng.integers(4, 9))
        m = rng.uniform(0.0, 1.0, size=(h, w))
        bank = FilterBank(1, dtype=np.float64)
        bank.weights = rng.uniform(-1.0, 1.0, size=(1, 3))
        target = extract_target(m)
        predictor = build_predictor(extract_neighbors(m))
        analytic = local_mse_grad(bank, predictor, target, 0)
        numeric = numeric_grad(
            lambda: local_mse(bank, predictor, target, 0), bank.weights[0], step
        )
        cases.append(GradCheckCase(f"filter_loss[{trial}] {h}x{w}",
                                   rel_err(analytic, numeric)))
    return GradCheckReport(cases)


def _fresh_sample(rng, shape, scale=1.0):
    return (rng.uniform(-1.0, 1.0, size=shape) * scale).astype(np.float64)


def layer_gradient_suite(seed=0, step=DEFAULT_STEP):
    """Conv, dense, pooling, softmax loss and an end-to-end network check."""
    rng = np.random.default_rng(seed)
    cases = []

    # conv (zero padding attached): dW, db, dx from a random linear readout
    conv = Conv2D(2, 3, ZeroPad(1), kernel_size=3, rng=rng, dtype=np.float64)
    x = _fresh_sample(rng, (2, 6, 6, 2))
    readout = _fresh_sample(rng, (2, 6, 6, 3))
    fn = lambda: float(np.sum(conv.forward(x) * readout))
    fn()
    dx = conv.backward(readout)
    cases += finite_diff_check(fn, [("conv.w", conv.w, conv.dw),
                                    ("conv.b", conv.b, conv.db),
                                    ("conv.x", x, dx)], step).cases

    # dense
    dense = Dense(7, 5, rng=rng, dtype=np.float64)
    xd = _fresh_sample(rng, (4, 7))
    rd = _fresh_sample(rng, (4, 5))
    fn = lambda: float(np.sum(dense.forward(xd) * rd))
    fn()
    dxd = dense.backward(rd)
    cases += finite_diff_check(fn, [("dense.w", dense.w, dense.dw),
                                    ("dense.b", dense.b, dense.db),
                                    ("dense.x", xd, dxd)], step).cases

    # maxpool: resample until every 2x2 block is comfortably tie-free
    pool = MaxPool2x2()
    for attempt in range(50):
        xp = _fresh_sample(rng, (2, 4, 4, 3))
        blocks = xp.reshape(2, 2, 2, 2, 2, 3).transpose(0, 1, 3, 5, 2, 4).reshape(-1, 4)
        top2 = np.sort(blocks, axis=1)[:, -2:]
        if (top2[:, 1] - top2[:, 0]).min() > 100 * step:
            break
    rp = _fresh_sample(rng, (2, 2, 2, 3))
    fn = lambda: float(np.sum(pool.forward(xp) * rp))
    fn()
    dxp = pool.backward(rp)
    cases += finite_diff_check(fn, [("maxpool.x", xp, dxp)], step).cases

    # relu away from the kink
    relu = ReLU()
    for attempt in range(50):
        xr = _fresh_sample(rng, (3, 9))
        if np.abs(xr).min() > 100 * step:
            break
    rr = _fresh_sample(rng, (3, 9))
    fn = lambda: float(np.sum(relu.forward(xr) * rr))
    fn()
    dxr = relu.backward(rr)
    cases += finite_diff_check(fn, [("relu.x", xr, dxr)], step).cases

    # softmax cross-entropy
    logits = _fresh_sample(rng, (5, 10), scale=2.0)
    labels = rng.integers(0, 10, size=5)
    fn = lambda: softmax_xent(logits, labels)[0]
    _, dlogits = softmax_xent(logits, labels)
    cases += finite_diff_check(fn, [("softmax_xent.logits", logits, dlogits)],
                               step).cases

    # end-to-end: conv-relu-pool-flatten-dense with cross-entropy loss
    for attempt in range(50):
        net_rng = np.random.default_rng(seed + 1000 + attempt)
        conv2 = Conv2D(2, 4, ZeroPad(1), kernel_size=3, rng=net_rng, dtype=np.float64)
        dense2 = Dense(4 * 4 * 4, 10, rng=net_rng, dtype=np.float64)
        layers = [conv2, ReLU(), MaxPool2x2(), Flatten(), dense2]
        xe = np.abs(_fresh_sample(net_rng, (2, 8, 8, 2)))
        ye = net_rng.integers(0, 10, size=2)

        def fwd():
            h = xe
            for layer in layers:
                h = layer.forward(h)
            return h

        preact = conv2.forward(xe)
        if np.abs(preact).min() > 100 * step:
            break
    fn = lambda: softmax_xent(fwd(), ye)[0]
    _, dl = softmax_xent(fwd(), ye)
    dy = dl
    for layer in reversed(layers):
        dy = layer.backward(dy)
    cases += finite_diff_check(fn, [("net.conv.w", conv2.w, conv2.dw),
                                    ("net.conv.b", conv2.b, conv2.db),
                                    ("net.dense.w", dense2.w, dense2.dw),
                                    ("net.dense.b", dense2.b, dense2.db),
                                    ("net.x", xe, dy)], step).cases

    return GradCheckReport(cases)


def full_suite(trials=100, seed=0, step=DEFAULT_STEP):
    report = module_gradient_suite(trials=trials, seed=seed, step=step)
    return GradCheckReport(report.cases + layer_gradient_suite(seed, step).cases)
