"""One-vs-rest soft-margin RBF kernel classifier trained by SMO.

Each binary machine solves the standard dual

    min 0.5 a' Q a - e' a   s.t.  y' a = 0,  0 <= a <= C,

with Q_ij = y_i y_j K(x_i, x_j), using second-order working-set selection.
Convergence is declared when the maximal KKT violation drops below ``tol``.
Kernel rows are computed on demand and cached, so the full kernel matrix is
only materialized for moderate problem sizes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ..errors import ArityError, DegenerateDataError, FormatError
from ..simulate import Dataset

_STD_FLOOR = 1e-12
_TAU = 1e-12

DEFAULT_C_GRID = tuple(2.0**k for k in range(-2, 7))
DEFAULT_GAMMA_GRID = tuple(2.0**k for k in range(-4, 5))


def rbf_kernel(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    """exp(-gamma * ||u - v||^2) for all pairs of rows."""
    sq = (
        np.sum(a * a, axis=1)[:, None]
        + np.sum(b * b, axis=1)[None, :]
        - 2.0 * (a @ b.T)
    )
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


class _KernelRows:
    """On-demand RBF kernel rows with a bounded cache."""

    def __init__(self, x: np.ndarray, gamma: float, max_cache_bytes: int = 800 << 20):
        self.x = x
        self.gamma = gamma
        self.sq_norms = np.sum(x * x, axis=1)
        n = x.shape[0]
        self._full = None
        if n * n * 8 <= max_cache_bytes:
            self._full = rbf_kernel(x, x, gamma)
        else:
            self._cache: dict[int, np.ndarray] = {}
            self._cap = max(2, max_cache_bytes // (n * 8))

    def row(self, i: int) -> np.ndarray:
        if self._full is not None:
            return self._full[i]
        cached = self._cache.get(i)
        if cached is not None:
            return cached
        sq = self.sq_norms + self.sq_norms[i] - 2.0 * (self.x @ self.x[i])
        np.maximum(sq, 0.0, out=sq)
        row = np.exp(-self.gamma * sq)
        if len(self._cache) >= self._cap:
            self._cache.pop(next(iter(self._cache)))
        self._cache[i] = row
        return row


def smo_solve(
    kernel: _KernelRows,
    y: np.ndarray,
    C: float,
    tol: float = 1e-3,
    max_iter: int | None = None,
) -> tuple[np.ndarray, float, float]:
    """Solve one binary dual problem.

    Returns (alpha, bias, final KKT gap).  ``y`` holds +/-1 labels.
    """
    n = len(y)
    if max_iter is None:
        max_iter = 20000 + 100 * n
    alpha = np.zeros(n)
    grad = -np.ones(n)  # Q @ alpha - 1 at alpha = 0
    neg_yg = y.copy().astype(float)  # -y * grad at alpha = 0
    up = np.empty(n, dtype=bool)
    low = np.empty(n, dtype=bool)
    pos = y > 0
    gap = np.inf
    for _ in range(max_iter):
        np.multiply(y, grad, out=neg_yg)
        np.negative(neg_yg, out=neg_yg)
        up = np.where(pos, alpha < C, alpha > 0)
        low = np.where(pos, alpha > 0, alpha < C)
        m_val = np.max(neg_yg[up]) if up.any() else -np.inf
        M_val = np.min(neg_yg[low]) if low.any() else np.inf
        gap = m_val - M_val
        if gap <= tol:
            break

        i = int(np.flatnonzero(up)[np.argmax(neg_yg[up])])
        ki = kernel.row(i)
        # Second-order gain over the candidate set.
        cand = low & (neg_yg < m_val)
        if not cand.any():
            break
        b_vec = m_val - neg_yg[cand]
        a_vec = 2.0 - 2.0 * y[i] * y[cand] * ki[cand]  # K_ii = K_tt = 1 for RBF
        np.maximum(a_vec, _TAU, out=a_vec)
        cand_idx = np.flatnonzero(cand)
        j = int(cand_idx[np.argmax(b_vec * b_vec / a_vec)])
        kj = kernel.row(j)

        yi, yj = y[i], y[j]
        ai_old, aj_old = alpha[i], alpha[j]
        quad = max(2.0 - 2.0 * yi * yj * ki[j], _TAU)
        if yi != yj:
            delta = (-grad[i] - grad[j]) / quad
            ai, aj = ai_old + delta, aj_old + delta
            diff = ai_old - aj_old
            if diff > 0:
                if aj < 0:
                    ai, aj = diff, 0.0
            else:
                if ai < 0:
                    ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            else:
                if aj > C:
                    ai, aj = C + diff, C
        else:
            delta = (grad[i] - grad[j]) / quad
            total = ai_old + aj_old
            ai, aj = ai_old - delta, aj_old + delta
            if ai < 0:
                ai, aj = 0.0, total
            elif aj < 0:
                ai, aj = total, 0.0
            if ai > C:
                ai, aj = C, total - C
            elif aj > C:
                ai, aj = total - C, C

        d_i, d_j = ai - ai_old, aj - aj_old
        if d_i == 0.0 and d_j == 0.0:
            break
        alpha[i], alpha[j] = ai, aj
        grad += (y * (yi * d_i)) * ki + (y * (yj * d_j)) * kj

    free = (alpha > 0) & (alpha < C)
    if free.any():
        bias = float(np.mean(-(y * grad)[free]))
    else:
        bias = float((m_val + M_val) / 2.0) if np.isfinite(m_val) and np.isfinite(M_val) else 0.0
    return alpha, bias, float(gap)


@dataclass
class SvmModel:
    sv_features: np.ndarray  # (n_sv, d) normalized support vectors (union)
    machine_positions: list[np.ndarray]  # per class: indices into sv_features
    machine_coefs: list[np.ndarray]  # per class: alpha_i * y_i
    machine_bias: np.ndarray  # per class
    classes: np.ndarray
    gamma: float
    C: float
    feat_mean: np.ndarray
    feat_std: np.ndarray

    def _normalize(self, features: np.ndarray) -> np.ndarray:
        features = np.atleast_2d(np.asarray(features, dtype=float))
        if features.shape[1] != self.sv_features.shape[1]:
            raise ArityError(
                f"feature dimension {features.shape[1]} does not match model "
                f"input {self.sv_features.shape[1]}"
            )
        return (features - self.feat_mean) / self.feat_std

    def decision_values(self, features: np.ndarray) -> np.ndarray:
        xn = self._normalize(features)
        kernel = rbf_kernel(xn, self.sv_features, self.gamma)
        out = np.empty((xn.shape[0], len(self.classes)))
        for c, (positions, coefs, bias) in enumerate(
            zip(self.machine_positions, self.machine_coefs, self.machine_bias)
        ):
            out[:, c] = kernel[:, positions] @ coefs + bias
        return out

    def predict(self, features: np.ndarray) -> np.ndarray:
        return self.classes[np.argmax(self.decision_values(features), axis=1)]


def _train_fixed(x_norm, labels, classes, C, gamma, tol, max_iter):
    kernel = _KernelRows(x_norm, gamma)
    positions, coefs, biases = [], [], []
    for cls in classes:
        y = np.where(labels == cls, 1.0, -1.0)
        alpha, bias, _ = smo_solve(kernel, y, C, tol=tol, max_iter=max_iter)
        sv = np.flatnonzero(alpha > 1e-12)
        positions.append(sv)
        coefs.append(alpha[sv] * y[sv])
        biases.append(bias)
    union = np.unique(np.concatenate(positions)) if positions else np.empty(0, dtype=int)
    remap = np.empty(len(x_norm), dtype=int)
    remap[union] = np.arange(len(union))
    positions = [remap[p] for p in positions]
    return x_norm[union], positions, coefs, np.array(biases)


def _cv_accuracy(x_norm, labels, classes, C, gamma, folds, tol, max_iter):
    n = len(labels)
    correct = 0
    for k in range(folds):
        test = np.arange(n) % folds == k
        train = ~test
        if len(np.unique(labels[train])) < 2 or not test.any():
            continue
        sv_x, positions, coefs, biases = _train_fixed(
            x_norm[train], labels[train], classes, C, gamma, tol, max_iter
        )
        kernel = rbf_kernel(x_norm[test], sv_x, gamma)
        dec = np.empty((int(test.sum()), len(classes)))
        for c in range(len(classes)):
            dec[:, c] = kernel[:, positions[c]] @ coefs[c] + biases[c]
        correct += int(np.sum(classes[np.argmax(dec, axis=1)] == labels[test]))
    return correct / n


def train_svm(
    train: Dataset,
    c_grid=DEFAULT_C_GRID,
    gamma_grid=DEFAULT_GAMMA_GRID,
    folds: int = 3,
    rng: np.random.Generator | None = None,
    tol: float = 1e-3,
    max_iter: int | None = None,
) -> SvmModel:
    """Grid-searched one-vs-rest RBF SVM.

    (C, gamma) is chosen by k-fold cross-validated accuracy; ties go to the
    smaller C, then the smaller gamma.  A 1x1 grid skips the cross-validation.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    labels = np.asarray(train.labels, dtype=np.int64)
    classes = np.unique(labels)
    if len(train) < 2 or len(classes) < 2:
        raise DegenerateDataError("training data must contain at least 2 distinct labels")

    features = np.asarray(train.features, dtype=float)
    mean = features.mean(axis=0)
    std = np.maximum(features.std(axis=0), _STD_FLOOR)
    x_norm = (features - mean) / std

    c_grid = sorted(float(c) for c in c_grid)
    gamma_grid = sorted(float(g) for g in gamma_grid)
    if len(c_grid) == 1 and len(gamma_grid) == 1:
        best_c, best_gamma = c_grid[0], gamma_grid[0]
    else:
        perm = rng.permutation(len(labels))
        x_cv, y_cv = x_norm[perm], labels[perm]
        best_c = best_gamma = None
        best_acc = -1.0
        for C in c_grid:
            for gamma in gamma_grid:
                acc = _cv_accuracy(x_cv, y_cv, classes, C, gamma, folds, tol, max_iter)
                if acc > best_acc:
                    best_acc, best_c, best_gamma = acc, C, gamma

    sv_x, positions, coefs, biases = _train_fixed(
        x_norm, labels, classes, best_c, best_gamma, tol, max_iter
    )
    return SvmModel(sv_x, positions, coefs, biases, classes, best_gamma, best_c, mean, std)


_FORMAT_TAG = "seisloc-svm-v1"


def save_svm(path, model: SvmModel) -> None:
    """Self-describing npz container; round-trip reproduces predictions."""
    meta = json.dumps(
        {
            "format": _FORMAT_TAG,
            "n_classes": len(model.classes),
            "gamma": model.gamma,
            "C": model.C,
        }
    )
    arrays = {
        "meta": np.array(meta),
        "sv_features": model.sv_features,
        "classes": model.classes,
        "bias": model.machine_bias,
        "feat_mean": model.feat_mean,
        "feat_std": model.feat_std,
    }
    for c in range(len(model.classes)):
        arrays[f"pos{c}"] = model.machine_positions[c]
        arrays[f"coef{c}"] = model.machine_coefs[c]
    np.savez(path, **arrays)


def load_svm(path) -> SvmModel:
    with np.load(path, allow_pickle=False) as data:
        try:
            meta = json.loads(str(data["meta"]))
        except KeyError as exc:
            raise FormatError(f"{path}: missing model metadata") from exc
        if meta.get("format") != _FORMAT_TAG:
            raise FormatError(f"{path}: not a {_FORMAT_TAG} container")
        n_classes = meta["n_classes"]
        return SvmModel(
            data["sv_features"],
            [data[f"pos{c}"] for c in range(n_classes)],
            [data[f"coef{c}"] for c in range(n_classes)],
            data["bias"],
            data["classes"],
            meta["gamma"],
            meta["C"],
            data["feat_mean"],
            data["feat_std"],
        )
