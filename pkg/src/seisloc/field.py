"""Field geometry: grid indexing, synthetic slowness models, sensor placement.

The monitored region is a rectangle of ``width_km x height_km`` divided into
``grid_w1`` cells along x and ``grid_w2`` cells along y.  Cells are identified
by a flat row-wise index ``i * grid_w2 + j`` where ``i`` is the x-cell and
``j`` the y-cell.  Slowness is stored per cell in seconds per kilometre.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, OutOfFieldError, ParameterError


@dataclass(frozen=True)
class FieldConfig:
    """Rectangular field split into a regular grid."""

    width_km: float = 1.0
    height_km: float = 1.0
    grid_w1: int = 20
    grid_w2: int = 20

    def __post_init__(self) -> None:
        if self.width_km <= 0 or self.height_km <= 0:
            raise ParameterError("field dimensions must be positive")
        if self.grid_w1 < 2 or self.grid_w2 < 2:
            raise ParameterError("grid must be at least 2x2")

    @property
    def n_cells(self) -> int:
        return self.grid_w1 * self.grid_w2

    @property
    def cell_width(self) -> float:
        return self.width_km / self.grid_w1

    @property
    def cell_height(self) -> float:
        return self.height_km / self.grid_w2

    def contains(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.width_km and 0.0 <= y <= self.height_km

    def cell_center(self, cell: int) -> tuple[float, float]:
        if not 0 <= cell < self.n_cells:
            raise ParameterError(f"cell index {cell} out of range [0, {self.n_cells})")
        i, j = divmod(cell, self.grid_w2)
        return ((i + 0.5) * self.cell_width, (j + 0.5) * self.cell_height)

    def cell_centers(self) -> np.ndarray:
        """(N, 2) array of cell centers in flat-index order."""
        i, j = np.divmod(np.arange(self.n_cells), self.grid_w2)
        return np.column_stack(
            ((i + 0.5) * self.cell_width, (j + 0.5) * self.cell_height)
        )


def cell_of(position: tuple[float, float], config: FieldConfig) -> int:
    """Flat index of the cell containing ``position``.

    Points exactly on an interior gridline belong to the higher-index cell
    along that axis; points on the outer max boundary belong to the last cell.
    """
    x, y = position
    if not config.contains(x, y):
        raise OutOfFieldError(f"position {position} outside field")
    # Scaling by grid size before dividing keeps exact gridline hits exact
    # (e.g. 0.5 * 10 / 1.0 == 5.0 with no rounding).
    i = min(int(math.floor(x * config.grid_w1 / config.width_km)), config.grid_w1 - 1)
    j = min(int(math.floor(y * config.grid_w2 / config.height_km)), config.grid_w2 - 1)
    return i * config.grid_w2 + j


def cells_of(positions: np.ndarray, config: FieldConfig) -> np.ndarray:
    """Vectorized :func:`cell_of` for an (n, 2) array of in-field positions."""
    x = positions[:, 0]
    y = positions[:, 1]
    if np.any(x < 0) or np.any(x > config.width_km) or np.any(y < 0) or np.any(y > config.height_km):
        raise OutOfFieldError("one or more positions outside field")
    i = np.minimum(
        np.floor(x * config.grid_w1 / config.width_km).astype(np.int64),
        config.grid_w1 - 1,
    )
    j = np.minimum(
        np.floor(y * config.grid_w2 / config.height_km).astype(np.int64),
        config.grid_w2 - 1,
    )
    return i * config.grid_w2 + j


@dataclass(frozen=True)
class SlownessModel:
    """Per-cell slowness (s/km) over a field grid."""

    config: FieldConfig
    values: np.ndarray = field(repr=False)  # shape (grid_w1, grid_w2)

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.config.grid_w1, self.config.grid_w2):
            raise ParameterError(
                f"values shape {values.shape} does not match grid "
                f"({self.config.grid_w1}, {self.config.grid_w2})"
            )
        if not np.all(values > 0):
            raise ParameterError("all slowness values must be positive")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def flattened(self) -> np.ndarray:
        """Length-N vector, row-wise: flattened[i * W2 + j] == values[i, j]."""
        return self.values.reshape(-1)


def unflatten(flat: np.ndarray, config: FieldConfig) -> SlownessModel:
    """Inverse of :attr:`SlownessModel.flattened`."""
    flat = np.asarray(flat, dtype=float)
    if flat.shape != (config.n_cells,):
        raise ParameterError(f"expected {config.n_cells} values, got {flat.shape}")
    return SlownessModel(config, flat.reshape(config.grid_w1, config.grid_w2))


@dataclass(frozen=True)
class SensorArray:
    """Sensor positions (km) inside or on the boundary of a field."""

    positions: np.ndarray  # shape (M, 2)
    config: FieldConfig

    def __post_init__(self) -> None:
        positions = np.asarray(self.positions, dtype=float)
        if positions.ndim != 2 or positions.shape[1] != 2 or positions.shape[0] < 2:
            raise ParameterError("need at least 2 sensors as an (M, 2) array")
        for x, y in positions:
            if not self.config.contains(x, y):
                raise OutOfFieldError(f"sensor at ({x}, {y}) outside field")
        positions = positions.copy()
        positions.flags.writeable = False
        object.__setattr__(self, "positions", positions)

    @property
    def count(self) -> int:
        return self.positions.shape[0]


@dataclass(frozen=True)
class WavyBarrierParams:
    """Parameters of the synthetic ground-truth slowness field.

    The field is ``base + amplitude * sin(k pi x/W) * sin(k pi y/H)`` at cell
    centers, overridden to ``barrier_slowness`` for cells whose center lies in
    the horizontal band ``barrier_y_lo <= y <= barrier_y_hi``.
    """

    base: float = 0.30
    amplitude: float = 0.08
    wave_count: int = 3
    barrier_y_lo: float = 0.475
    barrier_y_hi: float = 0.525
    barrier_slowness: float = 0.50

    def __post_init__(self) -> None:
        if self.base <= 0:
            raise ParameterError("base slowness must be positive")
        if abs(self.amplitude) >= self.base:
            raise ParameterError("|amplitude| must be smaller than base slowness")
        if self.barrier_slowness <= 0:
            raise ParameterError("barrier slowness must be positive")
        if self.barrier_y_lo > self.barrier_y_hi:
            raise ParameterError("barrier band is empty")


def build_synthetic_slowness(
    config: FieldConfig, params: WavyBarrierParams = WavyBarrierParams()
) -> SlownessModel:
    """Deterministic wavy-pattern slowness model with a horizontal barrier stripe."""
    if not (0.0 <= params.barrier_y_lo and params.barrier_y_hi <= config.height_km):
        raise ParameterError("barrier band must lie within the field height")
    xc = (np.arange(config.grid_w1) + 0.5) * config.cell_width
    yc = (np.arange(config.grid_w2) + 0.5) * config.cell_height
    k = params.wave_count
    wave_x = np.sin(k * np.pi * xc / config.width_km)
    wave_y = np.sin(k * np.pi * yc / config.height_km)
    values = params.base + params.amplitude * np.outer(wave_x, wave_y)
    in_barrier = (yc >= params.barrier_y_lo) & (yc <= params.barrier_y_hi)
    values[:, in_barrier] = params.barrier_slowness
    if not np.all(values > 0):
        raise ParameterError("parameters produce non-positive slowness")
    return SlownessModel(config, values)


def place_boundary_sensors(config: FieldConfig) -> SensorArray:
    """Eight sensors: the four field corners plus the four edge midpoints."""
    w, h = config.width_km, config.height_km
    positions = np.array(
        [
            (0.0, 0.0),
            (w, 0.0),
            (0.0, h),
            (w, h),
            (w / 2, 0.0),
            (w / 2, h),
            (0.0, h / 2),
            (w, h / 2),
        ]
    )
    return SensorArray(positions, config)


def save_slowness(path, model: SlownessModel) -> None:
    """Write a slowness model as plain text (round-trip exact).

    Line 1: ``W1 W2 width_km height_km``; then W1 lines of W2 values.
    """
    cfg = model.config
    with open(path, "w") as fh:
        fh.write(f"{cfg.grid_w1} {cfg.grid_w2} {cfg.width_km!r} {cfg.height_km!r}\n")
        for row in model.values:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def load_slowness(path) -> SlownessModel:
    """Read a slowness model written by :func:`save_slowness`."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 4:
            raise FormatError(f"{path}: bad header, expected 'W1 W2 width height'")
        try:
            w1, w2 = int(header[0]), int(header[1])
            width, height = float(header[2]), float(header[3])
        except ValueError as exc:
            raise FormatError(f"{path}: unparsable header") from exc
        config = FieldConfig(width, height, w1, w2)
        rows = []
        for line in fh:
            if line.strip():
                rows.append([float(v) for v in line.split()])
        values = np.array(rows)
        if values.shape != (w1, w2):
            raise FormatError(
                f"{path}: expected {w1}x{w2} values, got {values.shape}"
            )
    return SlownessModel(config, values)
