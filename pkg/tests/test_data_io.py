import numpy as np
import pytest

from padlearn.data_io import (MetricsRow, images_to_arrays, load_cifar10_batch,
                              load_cifar10_dir, read_metrics_csv, read_ppm,
                              write_metrics_csv, write_ppm)
from padlearn.synthetic import make_synthetic_cifar


def _record(label, r, g, b):
    """One CIFAR-format record from per-plane byte values."""
    body = bytes([label]) + bytes([r] * 1024) + bytes([g] * 1024) + bytes([b] * 1024)
    assert len(body) == 3073
    return body


class TestCifarLoader:
    def test_two_record_fixture(self, tmp_path):
        path = tmp_path / "batch.bin"
        path.write_bytes(_record(3, 10, 20, 30) + _record(9, 1, 2, 3))
        images = load_cifar10_batch(path)
        assert len(images) == 2
        assert images[0].label == 3 and images[1].label == 9
        assert images[0].pixels.shape == (32, 32, 3)
        assert np.all(images[0].pixels[:, :, 0] == np.float32(10 / 255))
        assert np.all(images[0].pixels[:, :, 1] == np.float32(20 / 255))
        assert np.all(images[0].pixels[:, :, 2] == np.float32(30 / 255))
        assert np.all(images[1].pixels[:, :, 2] == np.float32(3 / 255))

    def test_plane_position_mapping(self, tmp_path):
        body = bytearray(_record(0, 0, 0, 0))
        body[1 + 0 * 1024 + 0 * 32 + 1] = 77   # red plane, row 0, col 1
        body[1 + 1 * 1024 + 5 * 32 + 2] = 88   # green plane, row 5, col 2
        path = tmp_path / "batch.bin"
        path.write_bytes(bytes(body))
        img = load_cifar10_batch(path)[0].pixels
        assert img[0, 1, 0] == np.float32(77 / 255)
        assert img[5, 2, 1] == np.float32(88 / 255)
        assert img[0, 1, 1] == 0.0

    def test_truncated_file(self, tmp_path):
        path = tmp_path / "bad.bin"
        path.write_bytes(b"\x00" * 3072)
        with pytest.raises(ValueError):
            load_cifar10_batch(path)

    def test_bad_label(self, tmp_path):
        path = tmp_path / "bad.bin"
        path.write_bytes(_record(9, 0, 0, 0).replace(b"\x09", b"\x0a", 1))
        with pytest.raises(ValueError):
            load_cifar10_batch(path)

    def test_order_preserving_and_deterministic(self, tmp_path):
        blob = b"".join(_record(i % 10, i, i, i) for i in range(12))
        path = tmp_path / "batch.bin"
        path.write_bytes(blob)
        first = load_cifar10_batch(path)
        second = load_cifar10_batch(path)
        for a, b in zip(first, second):
            assert a.label == b.label
            assert np.array_equal(a.pixels, b.pixels)
        assert [im.label for im in first] == [i % 10 for i in range(12)]


class TestPpm:
    def test_one_pixel_white(self, tmp_path):
        path = tmp_path / "w.ppm"
        write_ppm(np.ones((1, 1, 3)), path)
        assert path.read_bytes() == b"P6\n1 1\n255\n\xff\xff\xff"

    def test_black_white_column(self, tmp_path):
        path = tmp_path / "bw.ppm"
        write_ppm(np.array([[[0.0, 0.0, 0.0]], [[1.0, 1.0, 1.0]]]), path)
        assert path.read_bytes() == b"P6\n1 2\n255\n" + b"\x00" * 3 + b"\xff" * 3

    def test_round_half_up(self, tmp_path):
        path = tmp_path / "h.ppm"
        write_ppm(np.full((1, 1, 3), 0.5), path)
        assert path.read_bytes()[-3:] == bytes([128] * 3)

    def test_out_of_range(self, tmp_path):
        with pytest.raises(ValueError):
            write_ppm(np.full((1, 1, 3), 1.5), tmp_path / "x.ppm")
        with pytest.raises(ValueError):
            write_ppm(np.full((1, 1, 3), -0.1), tmp_path / "x.ppm")

    def test_wrong_channels(self, tmp_path):
        with pytest.raises(ValueError):
            write_ppm(np.ones((2, 2, 4)), tmp_path / "x.ppm")

    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        img = rng.integers(0, 256, size=(7, 5, 3)).astype(np.float32) / 255.0
        path = tmp_path / "rt.ppm"
        write_ppm(img, path)
        assert np.array_equal(read_ppm(path), img)

    def test_read_rejects_other_formats(self, tmp_path):
        path = tmp_path / "p3.ppm"
        path.write_bytes(b"P3\n1 1\n255\n0 0 0\n")
        with pytest.raises(ValueError):
            read_ppm(path)


def test_cifar_to_ppm_lossless(tmp_path):
    make_synthetic_cifar(tmp_path / "d", n_train=10, n_test=10, seed=5)
    train, _ = load_cifar10_dir(tmp_path / "d")
    path = tmp_path / "img.ppm"
    write_ppm(train[0].pixels, path)
    assert np.array_equal(read_ppm(path), train[0].pixels)


class TestMetricsCsv:
    HEADER = "epoch,split,loss,accuracy,module_mse_mean,seconds"

    def test_empty(self, tmp_path):
        path = tmp_path / "m.csv"
        write_metrics_csv([], path)
        assert path.read_text() == self.HEADER + "\n"

    def test_one_row(self, tmp_path):
        path = tmp_path / "m.csv"
        write_metrics_csv([MetricsRow(1, "train", 2.25, 0.1, 0.05, 12.5)], path)
        lines = path.read_text().splitlines()
        assert len(lines) == 2
        assert lines[1] == "1,train,2.25,0.1,0.05,12.5"

    def test_round_trip(self, tmp_path):
        rows = [
            MetricsRow(1, "train", 2.25, 0.125, 0.0625, 3.5),
            MetricsRow(1, "test", 2.5, 0.25, 0.0625, 0.5),
            MetricsRow(2, "train", 1.75, 0.5, float("nan"), 3.25),
        ]
        path = tmp_path / "m.csv"
        write_metrics_csv(rows, path)
        back = read_metrics_csv(path)
        assert len(back) == 3
        for a, b in zip(rows, back):
            assert (a.epoch, a.split) == (b.epoch, b.split)
            for field in ("loss", "accuracy", "seconds"):
                assert getattr(a, field) == getattr(b, field)
        assert np.isnan(back[2].module_mse_mean)


class TestSynthetic:
    def test_deterministic(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        make_synthetic_cifar(a, n_train=30, n_test=10, seed=11)
        make_synthetic_cifar(b, n_train=30, n_test=10, seed=11)
        assert (a / "data_batch_1.bin").read_bytes() == (b / "data_batch_1.bin").read_bytes()
        assert (a / "test_batch.bin").read_bytes() == (b / "test_batch.bin").read_bytes()

    def test_loadable_and_balanced(self, tmp_path):
        make_synthetic_cifar(tmp_path / "d", n_train=100, n_test=20, seed=1)
        train, test = load_cifar10_dir(tmp_path / "d")
        assert len(train) == 100 and len(test) == 20
        x, y = images_to_arrays(train)
        assert x.shape == (100, 32, 32, 3)
        assert x.min() >= 0.0 and x.max() <= 1.0
        assert np.array_equal(np.bincount(y, minlength=10), np.full(10, 10))

    def test_limits(self, tmp_path):
        make_synthetic_cifar(tmp_path / "d", n_train=50, n_test=20, seed=1)
        train, test = load_cifar10_dir(tmp_path / "d", train_limit=8, test_limit=3)
        assert len(train) == 8 and len(test) == 3
