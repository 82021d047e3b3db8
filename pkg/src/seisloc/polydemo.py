"""Toy demonstration of the augmentation workflow on a polynomial domain shift.

A two-class 2D classifier is trained on source-domain Gaussian blobs.  The
deployment domain distorts every point through a quadratic polynomial map.
The map is fitted from a handful of source/target point pairs, the source
training set is pushed through the fitted map, and the classifier is
retrained on the transformed data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError, ParameterError


@dataclass(frozen=True)
class PolyTransform:
    """x' = a1 x + a2 y + a3 xy + a4 x^2 + a5 y^2, same form for y' with b."""

    a: tuple[float, float, float, float, float]
    b: tuple[float, float, float, float, float]

    def __post_init__(self) -> None:
        if len(self.a) != 5 or len(self.b) != 5:
            raise ParameterError("transform needs 5 coefficients per output")
        if not (np.all(np.isfinite(self.a)) and np.all(np.isfinite(self.b))):
            raise ParameterError("coefficients must be finite")


IDENTITY = PolyTransform((1, 0, 0, 0, 0), (0, 1, 0, 0, 0))

# Fixed distorted instance used by the default demo: a rough reflection plus
# quadratic warp, so a source-only classifier fails badly on target data.
DEMO_TRANSFORM = PolyTransform((-0.8, 0.3, 0.2, 0.1, -0.15), (0.2, -0.9, -0.1, 0.2, 0.1))


def _design_rows(points: np.ndarray) -> np.ndarray:
    x, y = points[:, 0], points[:, 1]
    return np.column_stack((x, y, x * y, x * x, y * y))


def apply_transform(t: PolyTransform, points: np.ndarray) -> np.ndarray:
    """Map (n, 2) points (or one point) through the polynomial transform."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    rows = _design_rows(points)
    out = np.column_stack((rows @ np.asarray(t.a), rows @ np.asarray(t.b)))
    return out if out.shape[0] > 1 else out[0]


def fit_transform(source_points: np.ndarray, target_points: np.ndarray) -> PolyTransform:
    """Least-squares fit of the transform from point pairs.

    Five noise-free pairs in general position are interpolated exactly; more
    pairs average out perturbations.
    """
    source_points = np.atleast_2d(np.asarray(source_points, dtype=float))
    target_points = np.atleast_2d(np.asarray(target_points, dtype=float))
    if len(source_points) != len(target_points) or len(source_points) < 5:
        raise DegenerateDataError("need at least 5 source/target point pairs")
    design = _design_rows(source_points)
    if np.linalg.matrix_rank(design) < 5:
        raise DegenerateDataError("source points are degenerate (design rank < 5)")
    coef, *_ = np.linalg.lstsq(design, target_points, rcond=None)
    return PolyTransform(tuple(coef[:, 0]), tuple(coef[:, 1]))


class NearestCentroid:
    """Minimal 2-class classifier for the demo."""

    def __init__(self, centroids: np.ndarray):
        self.centroids = centroids

    @classmethod
    def fit(cls, points: np.ndarray, labels: np.ndarray) -> "NearestCentroid":
        centroids = np.stack([points[labels == c].mean(axis=0) for c in (0, 1)])
        return cls(centroids)

    def predict(self, points: np.ndarray) -> np.ndarray:
        d = np.linalg.norm(points[:, None, :] - self.centroids[None, :, :], axis=2)
        return np.argmin(d, axis=1)


@dataclass(frozen=True)
class DemoReport:
    source_acc_on_target: float
    augmented_acc_on_target: float


def demo_pipeline(
    seed: int = 0,
    hidden_transform: PolyTransform = DEMO_TRANSFORM,
    n_train: int = 400,
    n_test: int = 400,
    n_pairs: int = 20,
) -> DemoReport:
    """Run the four workflow steps and score both classifiers on target data."""
    rng = np.random.default_rng(seed)
    centers = np.array([[-1.0, -0.6], [1.0, 0.6]])

    def blobs(n):
        labels = rng.integers(0, 2, n)
        points = centers[labels] + rng.normal(0.0, 0.45, size=(n, 2))
        return points, labels

    src_train, src_labels = blobs(n_train)
    source_model = NearestCentroid.fit(src_train, src_labels)

    # Step 2: fit the first principle from a few source/target pairs.
    pair_src = rng.uniform(-2.0, 2.0, size=(n_pairs, 2))
    pair_dst = apply_transform(hidden_transform, pair_src)
    fitted = fit_transform(pair_src, pair_dst)

    # Step 3: transform all source training data; step 4: retrain.
    aug_train = apply_transform(fitted, src_train)
    aug_model = NearestCentroid.fit(aug_train, src_labels)

    test_points, test_labels = blobs(n_test)
    target_test = apply_transform(hidden_transform, test_points)

    source_acc = float(np.mean(source_model.predict(target_test) == test_labels))
    augmented_acc = float(np.mean(aug_model.predict(target_test) == test_labels))
    return DemoReport(source_acc, augmented_acc)
