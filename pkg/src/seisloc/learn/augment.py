"""Augmented-fingerprint generation and the doubling schedule.

Augmented samples are drawn uniformly over the field and pushed through the
estimated slowness model; by default their fingerprints are noise-free.
The schedule starts at X = 100 * N samples and doubles X until the held-out
validation accuracy stops improving by more than the configured threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ArityError, ParameterError
from ..field import SensorArray, SlownessModel, cells_of
from ..raytrace import assemble_event_matrix
from ..simulate import AUGMENTED, Dataset, NoiseSpec, add_noise, propagation_times, tdoa_from_times


def generate_augmented(
    s_hat: SlownessModel,
    count: int,
    sensors: SensorArray,
    spec: NoiseSpec,
    rng: np.random.Generator,
    inject_noise: bool = False,
) -> Dataset:
    """``count`` uniform-position fingerprints synthesized from ``s_hat``."""
    if count < 1:
        raise ArityError("count must be at least 1")
    config = s_hat.config
    sources = np.column_stack(
        (
            rng.uniform(0.0, config.width_km, count),
            rng.uniform(0.0, config.height_km, count),
        )
    )
    features = np.empty((count, sensors.count - 1))
    for idx, src in enumerate(sources):
        times = propagation_times(assemble_event_matrix(src, sensors, config), s_hat)
        if inject_noise:
            times = add_noise(times, spec, rng)
        features[idx] = tdoa_from_times(times)
    labels = cells_of(sources, config)
    prov = np.full(count, AUGMENTED, dtype=object)
    return Dataset(features, labels, sources, prov, sensors.count, config)


@dataclass(frozen=True)
class AugmentConfig:
    """Doubling-schedule knobs.  initial_factor scales N into the first X."""

    initial_factor: int = 100
    doubling: int = 2
    threshold: float = 0.005  # min validation-accuracy gain to keep doubling
    max_rounds: int = 6
    inject_noise: bool = False
    val_fraction: float = 0.1

    def __post_init__(self) -> None:
        if self.initial_factor < 1 or self.max_rounds < 1:
            raise ParameterError("initial_factor and max_rounds must be at least 1")
        if self.threshold < 0:
            raise ParameterError("threshold must be non-negative")


def augmentation_schedule(
    s_hat: SlownessModel,
    real_train: Dataset,
    trainer,
    config: AugmentConfig,
    sensors: SensorArray,
    spec: NoiseSpec,
    rng: np.random.Generator,
):
    """Train on real + augmented data, doubling the augmented volume until
    the validation accuracy saturates.

    ``trainer`` maps a Dataset and an rng to a fitted classifier.  Returns
    (model, final X, validation-accuracy trace).
    """
    n_cells = s_hat.config.n_cells
    x_size = config.initial_factor * n_cells
    best_acc = 0.0
    model = None
    trace: list[float] = []
    for round_idx in range(config.max_rounds):
        pool = generate_augmented(
            s_hat, x_size, sensors, spec, rng, inject_noise=config.inject_noise
        )
        # Hold out part of the augmented pool; real samples always train.
        n_val = max(1, int(round(config.val_fraction * len(pool))))
        order = rng.permutation(len(pool))
        val = pool.subset(order[:n_val])
        train = pool.subset(order[n_val:]).concat(real_train)
        candidate = trainer(train, rng)
        acc = float(np.mean(candidate.predict(val.features) == val.labels))
        trace.append(acc)
        improved = acc - best_acc
        if acc > best_acc:
            best_acc = acc
            model = candidate
        if improved <= config.threshold or round_idx == config.max_rounds - 1:
            if model is None:
                model = candidate
            break
        x_size *= config.doubling
    return model, x_size, trace
