import os
from pathlib import Path

import numpy as np
import pytest

from padlearn.data_io import images_to_arrays, load_cifar10_dir
from padlearn.synthetic import make_synthetic_cifar


def _valid_data_dir(path):
    p = Path(path)
    return (p / "test_batch.bin").exists() and list(p.glob("data_batch_*.bin"))


@pytest.fixture(scope="session")
def cifar_dir(tmp_path_factory):
    """Directory of CIFAR-10-format binary batches.

    Uses the real dataset when present (CIFAR10_DIR env var or
    data/cifar-10-batches-bin); otherwise generates the deterministic
    synthetic corpus in the same binary layout.
    """
    for candidate in (os.environ.get("CIFAR10_DIR"),
                      Path(__file__).resolve().parent.parent / "data" / "cifar-10-batches-bin"):
        if candidate and _valid_data_dir(candidate):
            return Path(candidate)
    out = tmp_path_factory.mktemp("cifar_synth")
    make_synthetic_cifar(out, n_train=6000, n_test=1000, seed=2024)
    return out


@pytest.fixture(scope="session")
def desk_dataset(cifar_dir):
    """(x_train, y_train, x_test, y_test) at the full desk scale."""
    train, test = load_cifar10_dir(cifar_dir, train_limit=5000, test_limit=1000)
    return images_to_arrays(train) + images_to_arrays(test)


@pytest.fixture(scope="session")
def batch64(cifar_dir):
    """A fixed batch of 64 training images, (64, 32, 32, 3) float32."""
    train, _ = load_cifar10_dir(cifar_dir, train_limit=64, test_limit=1)
    x, _ = images_to_arrays(train)
    return x


M4 = np.arange(1.0, 17.0).reshape(4, 4)


@pytest.fixture
def m4():
    """The 4x4 worked example: [[1..4],[5..8],[9..12],[13..16]]."""
    return M4.copy()
