"""Grid-wise accuracy evaluation for any trained classifier."""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateDataError
from ..simulate import Dataset


def predict(model, features: np.ndarray) -> np.ndarray:
    """Cell labels for a batch of features; dispatches on the model type."""
    return model.predict(features)


def evaluate(model, test: Dataset) -> float:
    """Fraction of test samples whose predicted cell equals the true cell."""
    if len(test) == 0:
        raise DegenerateDataError("cannot evaluate on an empty test set")
    return float(np.mean(model.predict(test.features) == test.labels))
