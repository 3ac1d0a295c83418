"""Deterministic training loop with per-epoch metrics.

Given the same seed (and thread count) two runs produce bit-identical
parameters and metrics: weights are initialized from one seeded generator,
the training subset is shuffled once, and the same batch partition is
reused every epoch so no randomness enters the epoch loop.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..data_io import MetricsRow
from .layers import softmax_xent
from .network import build_tiny4
from .optim import Adam


@dataclass
class TrainReport:
    rows: list
    total_seconds: float
    module_seconds: float

    def test_accuracies(self):
        return [r.accuracy for r in self.rows if r.split == "test"]

    @property
    def last5_mean_test_accuracy(self):
        accs = self.test_accuracies()
        return float(np.mean(accs[-5:]))

    @property
    def overhead_ratio(self):
        """Wall-clock ratio vs the same run with padding cost removed."""
        base = self.total_seconds - self.module_seconds
        return self.total_seconds / base if base > 0 else float("inf")


def evaluate(net, x, y, batch_size=256):
    """Mean loss and accuracy of `net` over (x, y), in eval mode."""
    net.eval()
    n = len(x)
    loss_sum = 0.0
    correct = 0
    for start in range(0, n, batch_size):
        xb = x[start : start + batch_size]
        yb = y[start : start + batch_size]
        logits = net.forward(xb)
        loss, _ = softmax_xent(logits, yb)
        loss_sum += loss * len(xb)
        correct += int((logits.argmax(axis=1) == yb).sum())
    return loss_sum / n, correct / n


def _epoch_module_mse(modules, batch_mse_sums, batch_counts):
    values = []
    for m in modules:
        if m.frozen or batch_counts[id(m)] == 0:
            values.append(m.last_local_mse)
        else:
            values.append(batch_mse_sums[id(m)] / batch_counts[id(m)])
    return float(np.mean(values)) if values else float("nan")


def train(spec, x_train, y_train, x_test, y_test, epochs, batch_size, seed,
          learning_rate, freeze_after=None, log=None):
    """Train tiny4 per `spec`; returns the per-epoch metric rows.

    `freeze_after=k` stops the padding modules' own training after epoch k
    (0 freezes them from the start); their last mean squared error is then
    carried forward in the metrics.
    """
    if len(x_train) == 0:
        raise ValueError("empty training set")
    net = build_tiny4(spec, seed)
    optimizer = Adam(learning_rate)
    perm = np.random.default_rng(seed).permutation(len(x_train))
    batches = [perm[i : i + batch_size] for i in range(0, len(perm), batch_size)]

    if freeze_after is not None and freeze_after <= 0:
        for m in net.modules:
            m.freeze()

    rows = []
    total_start = time.perf_counter()
    for epoch in range(1, epochs + 1):
        net.train()
        epoch_start = time.perf_counter()
        loss_sum = 0.0
        correct = 0
        mse_sums = {id(m): 0.0 for m in net.modules}
        mse_counts = {id(m): 0 for m in net.modules}
        for b, idx in enumerate(batches):
            xb = x_train[idx]
            yb = y_train[idx]
            logits = net.forward(xb)
            loss, dlogits = softmax_xent(logits, yb)
            if not np.isfinite(loss):
                raise FloatingPointError(
                    f"training diverged: non-finite loss at epoch {epoch}, batch {b}"
                )
            loss_sum += loss * len(xb)
            correct += int((logits.argmax(axis=1) == yb).sum())
            net.backward(dlogits)
            optimizer.step(net.params(), net.grads())
            for m in net.modules:
                if not m.frozen:
                    mse_sums[id(m)] += m.last_local_mse * len(xb)
                    mse_counts[id(m)] += len(xb)
        train_seconds = time.perf_counter() - epoch_start
        module_mse = _epoch_module_mse(net.modules, mse_sums, mse_counts)

        eval_start = time.perf_counter()
        test_loss, test_acc = evaluate(net, x_test, y_test)
        eval_seconds = time.perf_counter() - eval_start

        rows.append(MetricsRow(epoch, "train", loss_sum / len(x_train),
                               correct / len(x_train), module_mse, train_seconds))
        rows.append(MetricsRow(epoch, "test", test_loss, test_acc, module_mse,
                               eval_seconds))
        if log is not None:
            log(f"epoch {epoch:3d}  train_loss {loss_sum / len(x_train):.4f}  "
                f"train_acc {correct / len(x_train):.4f}  test_acc {test_acc:.4f}  "
                f"module_mse {module_mse:.6g}  {train_seconds:.1f}s")
        if freeze_after is not None and epoch == freeze_after:
            for m in net.modules:
                m.freeze()

    total_seconds = time.perf_counter() - total_start
    module_seconds = sum(m.seconds for m in net.modules)
    # frozen mean-interp pads also cost time; count every padding module
    seen = {id(m) for m in net.modules}
    for layer in net.layers:
        pad = getattr(layer, "padding", None)
        if pad is not None and hasattr(pad, "seconds") and id(pad) not in seen:
            module_seconds += pad.seconds
    return net, TrainReport(rows=rows, total_seconds=total_seconds,
                            module_seconds=module_seconds)
