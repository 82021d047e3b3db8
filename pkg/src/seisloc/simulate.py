"""Event simulation: propagation times, measurement noise, TDoA fingerprints.

Propagation time to sensor m is the ray-path length in each cell weighted by
that cell's slowness.  Measurement noise is i.i.d. Gaussian with standard
deviation ``xi * mean(t)``.  The fingerprint is the vector of arrival-time
differences relative to sensor 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import ArityError, ConfigMismatchError, DegenerateDataError, FormatError, OutOfFieldError
from .field import FieldConfig, SensorArray, SlownessModel, cells_of
from .raytrace import RayMatrix, assemble_event_matrix

REAL = "real"
AUGMENTED = "augmented"


@dataclass(frozen=True)
class NoiseSpec:
    """Relative measurement-noise level and the RNG seed that realizes it."""

    xi: float = 0.02
    seed: int = 0

    def __post_init__(self) -> None:
        if self.xi < 0:
            raise ArityError("noise level must be non-negative")


@dataclass(frozen=True)
class TdoaSample:
    feature: np.ndarray  # length M-1
    source: tuple[float, float]
    label: int
    provenance: str = REAL


@dataclass
class Dataset:
    """Labeled TDoA fingerprints stored as flat arrays."""

    features: np.ndarray  # (n, M-1)
    labels: np.ndarray  # (n,) flat cell indices
    sources: np.ndarray  # (n, 2) km
    provenance: np.ndarray  # (n,) strings
    sensor_count: int
    config: FieldConfig

    def __post_init__(self) -> None:
        n = self.features.shape[0]
        if self.features.ndim != 2 or self.features.shape[1] != self.sensor_count - 1:
            raise ArityError(
                f"features must be (n, {self.sensor_count - 1}), got {self.features.shape}"
            )
        if len(self.labels) != n or len(self.sources) != n or len(self.provenance) != n:
            raise ArityError("dataset arrays disagree in length")

    def __len__(self) -> int:
        return self.features.shape[0]

    def __getitem__(self, idx: int) -> TdoaSample:
        return TdoaSample(
            self.features[idx],
            (float(self.sources[idx, 0]), float(self.sources[idx, 1])),
            int(self.labels[idx]),
            str(self.provenance[idx]),
        )

    def concat(self, other: "Dataset") -> "Dataset":
        if other.sensor_count != self.sensor_count or other.config != self.config:
            raise ConfigMismatchError("datasets built for different configurations")
        return Dataset(
            np.vstack((self.features, other.features)),
            np.concatenate((self.labels, other.labels)),
            np.vstack((self.sources, other.sources)),
            np.concatenate((self.provenance, other.provenance)),
            self.sensor_count,
            self.config,
        )

    def subset(self, idx) -> "Dataset":
        return Dataset(
            self.features[idx],
            self.labels[idx],
            self.sources[idx],
            self.provenance[idx],
            self.sensor_count,
            self.config,
        )


def propagation_times(matrix: RayMatrix, model: SlownessModel) -> np.ndarray:
    """Clean propagation time (s) to each sensor: path lengths times slowness."""
    flat = model.flattened
    n = model.config.n_cells
    times = np.empty(matrix.sensor_count)
    for m, row in enumerate(matrix.rows):
        if row.cells.size and row.cells[-1] >= n:
            raise ConfigMismatchError("ray matrix indexes cells beyond the slowness grid")
        times[m] = float(row.lengths @ flat[row.cells]) if row.cells.size else 0.0
    return times


def add_noise(times: np.ndarray, spec: NoiseSpec, rng: np.random.Generator) -> np.ndarray:
    """times plus i.i.d. Gaussian noise with std ``xi * mean(times)``."""
    times = np.asarray(times, dtype=float)
    if times.size == 0:
        raise ArityError("empty time vector")
    sigma = spec.xi * float(np.mean(times))
    if sigma == 0.0:
        return times.copy()
    return times + rng.normal(0.0, sigma, size=times.shape)


def tdoa_from_times(times: np.ndarray) -> np.ndarray:
    """Arrival-time differences relative to sensor 0 (length M-1)."""
    times = np.asarray(times, dtype=float)
    if times.size < 2:
        raise ArityError("need at least 2 arrival times to form differences")
    return times[1:] - times[0]


def sample_real_events(
    count: int,
    config: FieldConfig,
    sigma_km: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """(count, 2) event sources: isotropic Gaussian at field center, kept in-field."""
    if count < 1:
        raise ArityError("count must be at least 1")
    if sigma_km <= 0:
        raise ArityError("sigma_km must be positive")
    center = np.array([config.width_km / 2, config.height_km / 2])
    out = np.empty((count, 2))
    filled = 0
    while filled < count:
        draw = center + rng.normal(0.0, sigma_km, size=(count - filled, 2))
        ok = (
            (draw[:, 0] >= 0)
            & (draw[:, 0] <= config.width_km)
            & (draw[:, 1] >= 0)
            & (draw[:, 1] <= config.height_km)
        )
        kept = draw[ok]
        out[filled : filled + len(kept)] = kept
        filled += len(kept)
    return out


def fingerprint(
    source,
    model: SlownessModel,
    sensors: SensorArray,
    spec: NoiseSpec,
    rng: np.random.Generator,
) -> np.ndarray:
    """TDoA feature of one event: trace, propagate, perturb, difference."""
    matrix = assemble_event_matrix(source, sensors, model.config)
    times = propagation_times(matrix, model)
    noisy = add_noise(times, spec, rng)
    return tdoa_from_times(noisy)


def make_dataset(
    sources: np.ndarray,
    model: SlownessModel,
    sensors: SensorArray,
    spec: NoiseSpec,
    rng: np.random.Generator,
    provenance: str = REAL,
) -> Dataset:
    """Simulate every source into a labeled fingerprint dataset."""
    sources = np.atleast_2d(np.asarray(sources, dtype=float))
    config = model.config
    if not np.all([config.contains(x, y) for x, y in sources]):
        raise OutOfFieldError("all sources must lie inside the field")
    n = len(sources)
    features = np.empty((n, sensors.count - 1))
    for idx, src in enumerate(sources):
        features[idx] = fingerprint(src, model, sensors, spec, rng)
    labels = cells_of(sources, config)
    prov = np.full(n, provenance, dtype=object)
    return Dataset(features, labels, sources.copy(), prov, sensors.count, config)


def save_dataset(path, dataset: Dataset) -> None:
    """CSV with header ``label,src_x,src_y,provenance,f1,...,f{M-1}``."""
    cols = [f"f{k}" for k in range(1, dataset.sensor_count)]
    with open(path, "w") as fh:
        fh.write("label,src_x,src_y,provenance," + ",".join(cols) + "\n")
        for i in range(len(dataset)):
            feat = ",".join(repr(float(v)) for v in dataset.features[i])
            fh.write(
                f"{int(dataset.labels[i])},{float(dataset.sources[i, 0])!r},"
                f"{float(dataset.sources[i, 1])!r},{dataset.provenance[i]},{feat}\n"
            )


def load_dataset(path, config: FieldConfig) -> Dataset:
    """Read a dataset written by :func:`save_dataset`."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if header[:4] != ["label", "src_x", "src_y", "provenance"]:
            raise FormatError(f"{path}: unexpected dataset header {header[:4]}")
        sensor_count = len(header) - 4 + 1
        labels, sources, prov, feats = [], [], [], []
        for line in fh:
            if not line.strip():
                continue
            parts = line.strip().split(",")
            labels.append(int(parts[0]))
            sources.append((float(parts[1]), float(parts[2])))
            prov.append(parts[3])
            feats.append([float(v) for v in parts[4:]])
    if not labels:
        raise DegenerateDataError(f"{path}: empty dataset")
    return Dataset(
        np.array(feats),
        np.array(labels),
        np.array(sources),
        np.array(prov, dtype=object),
        sensor_count,
        config,
    )
