import numpy as np
import pytest

from seisloc.errors import DegenerateDataError
from seisloc.field import FieldConfig
from seisloc.learn.svm import (
    _KernelRows,
    _train_fixed,
    load_svm,
    rbf_kernel,
    save_svm,
    smo_solve,
    train_svm,
)
from seisloc.simulate import Dataset


def as_dataset(features, labels, config=None):
    if config is None:
        config = FieldConfig(1, 1, 2, 2)
    n = len(labels)
    d = features.shape[1]
    return Dataset(
        features,
        np.asarray(labels),
        np.full((n, 2), 0.1),
        np.full(n, "real", dtype=object),
        d + 1,
        config,
    )


def projected_gradient_oracle(K, y, C, iters=30000, lr=None):
    """Brute-force dual solve: projected gradient on the same box/hyperplane QP.

    The projection onto {0 <= a <= C, y'a = 0} is computed exactly by
    bisection on the hyperplane multiplier.
    """
    n = len(y)
    Q = (y[:, None] * y[None, :]) * K
    if lr is None:
        lr = 1.0 / max(np.linalg.eigvalsh(Q).max(), 1e-12)

    def project(a):
        lo, hi = -1e6, 1e6
        for _ in range(200):
            lam = 0.5 * (lo + hi)
            clipped = np.clip(a - lam * y, 0.0, C)
            if y @ clipped > 0:
                lo = lam
            else:
                hi = lam
        return np.clip(a - 0.5 * (lo + hi) * y, 0.0, C)

    alpha = project(np.zeros(n))
    for _ in range(iters):
        grad = Q @ alpha - 1.0
        alpha = project(alpha - lr * grad)
    grad = Q @ alpha - 1.0
    free = (alpha > 1e-8) & (alpha < C - 1e-8)
    if free.any():
        bias = float(np.mean(-(y * grad)[free]))
    else:
        bias = 0.0
    return alpha, bias


class TestSmo:
    def test_kkt_and_box_constraints(self):
        rng = np.random.default_rng(0)
        x = np.vstack((rng.normal(-1, 0.7, (30, 2)), rng.normal(1, 0.7, (30, 2))))
        y = np.concatenate((-np.ones(30), np.ones(30)))
        C = 4.0
        kernel = _KernelRows(x, gamma=0.5)
        alpha, _, gap = smo_solve(kernel, y, C, tol=1e-3)
        assert gap <= 1e-3
        assert np.all(alpha >= 0.0)
        assert np.all(alpha <= C)
        assert abs(y @ alpha) <= 1e-9

    def test_agrees_with_projected_gradient_oracle(self):
        rng = np.random.default_rng(1)
        centers = np.array([[-1.5, -1.5], [1.5, -1.5], [-1.5, 1.5], [1.5, 1.5]])
        labels = np.repeat(np.arange(4), 20)
        x = centers[labels] + rng.normal(0, 0.6, (80, 2))
        mean, std = x.mean(axis=0), x.std(axis=0)
        xn = (x - mean) / std
        C, gamma = 4.0, 1.0
        K = rbf_kernel(xn, xn, gamma)
        kernel = _KernelRows(xn, gamma)

        dec_smo = np.empty((80, 4))
        dec_pg = np.empty((80, 4))
        for c in range(4):
            y = np.where(labels == c, 1.0, -1.0)
            a_smo, b_smo, _ = smo_solve(kernel, y, C, tol=1e-4)
            a_pg, b_pg = projected_gradient_oracle(K, y, C)
            dec_smo[:, c] = K @ (a_smo * y) + b_smo
            dec_pg[:, c] = K @ (a_pg * y) + b_pg
        agreement = np.mean(np.argmax(dec_smo, axis=1) == np.argmax(dec_pg, axis=1))
        assert agreement >= 0.98


class TestTrainSvm:
    def test_separable_clusters_perfect_train_accuracy(self):
        rng = np.random.default_rng(2)
        x = np.vstack((rng.normal(-3, 0.3, (25, 3)), rng.normal(3, 0.3, (25, 3))))
        train = as_dataset(x, np.repeat([0, 3], 25))
        model = train_svm(train, c_grid=[100.0], gamma_grid=[1.0], rng=rng)
        assert np.mean(model.predict(x) == train.labels) == 1.0

    def test_xor_pattern_needs_kernel(self):
        rng = np.random.default_rng(3)
        centers = np.array([[-1, -1], [1, 1], [-1, 1], [1, -1]], dtype=float)
        labels = np.array([0, 0, 1, 1])
        idx = rng.integers(0, 4, 120)
        x = centers[idx] + rng.normal(0, 0.25, (120, 2))
        train = as_dataset(x, labels[idx])
        model = train_svm(train, c_grid=[10.0], gamma_grid=[1.0], rng=rng)
        assert np.mean(model.predict(x) == train.labels) >= 0.95

    def test_grid_search_tie_breaks_to_small_c_and_gamma(self):
        rng = np.random.default_rng(4)
        x = np.vstack((rng.normal(-3, 0.2, (15, 2)), rng.normal(3, 0.2, (15, 2))))
        train = as_dataset(x, np.repeat([0, 1], 15))
        # Every grid point separates this data; the tie must pick the smallest.
        model = train_svm(train, c_grid=[1.0, 4.0], gamma_grid=[0.5, 2.0], folds=3, rng=rng)
        assert model.C == 1.0
        assert model.gamma == 0.5

    def test_duals_within_box_after_training(self):
        rng = np.random.default_rng(5)
        centers = np.array([[-2, 0], [2, 0], [0, 2], [0, -2]], dtype=float)
        labels = np.repeat(np.arange(4), 15)
        x = centers[labels] + rng.normal(0, 0.5, (60, 2))
        train = as_dataset(x, labels)
        model = train_svm(train, c_grid=[2.0], gamma_grid=[1.0], rng=rng)
        for coefs in model.machine_coefs:
            assert np.all(np.abs(coefs) <= model.C + 1e-12)
            assert np.all(np.abs(coefs) > 0)

    def test_single_class_rejected(self):
        rng = np.random.default_rng(6)
        train = as_dataset(rng.normal(0, 1, (20, 2)), np.zeros(20, dtype=int))
        with pytest.raises(DegenerateDataError):
            train_svm(train, c_grid=[1.0], gamma_grid=[1.0], rng=rng)


class TestModelFile:
    def test_round_trip_identical_predictions(self, tmp_path):
        rng = np.random.default_rng(7)
        centers = np.array([[-2, -2], [2, 2], [-2, 2]], dtype=float)
        labels = np.repeat(np.arange(3), 20)
        x = centers[labels] + rng.normal(0, 0.5, (60, 2))
        train = as_dataset(x, labels)
        model = train_svm(train, c_grid=[4.0], gamma_grid=[0.5], rng=rng)
        path = tmp_path / "svm.npz"
        save_svm(path, model)
        loaded = load_svm(path)
        probe = rng.normal(0, 2, (50, 2))
        assert np.array_equal(model.predict(probe), loaded.predict(probe))
