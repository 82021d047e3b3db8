"""Straight-ray traversal of the field grid.

A ray from ``src`` to ``dst`` is cut at every gridline crossing; each
sub-segment's length is credited to the cell containing its midpoint, which
resolves gridline ties identically to :func:`seisloc.field.cell_of`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OutOfFieldError
from .field import FieldConfig, SensorArray, cells_of


@dataclass(frozen=True)
class RayRow:
    """Sparse per-cell path lengths (km) of one ray."""

    cells: np.ndarray  # sorted flat cell indices
    lengths: np.ndarray  # matching path lengths, all > 0
    total_length: float

    def as_dict(self) -> dict[int, float]:
        return {int(c): float(v) for c, v in zip(self.cells, self.lengths)}


@dataclass(frozen=True)
class RayMatrix:
    """One RayRow per sensor, in sensor order."""

    rows: tuple[RayRow, ...]

    @property
    def sensor_count(self) -> int:
        return len(self.rows)


_EMPTY = np.empty(0)
_EMPTY_I = np.empty(0, dtype=np.int64)


def trace_ray(
    src: tuple[float, float], dst: tuple[float, float], config: FieldConfig
) -> RayRow:
    """Per-cell path lengths of the straight segment from src to dst."""
    x0, y0 = float(src[0]), float(src[1])
    x1, y1 = float(dst[0]), float(dst[1])
    if not config.contains(x0, y0):
        raise OutOfFieldError(f"ray endpoint {src} outside field")
    if not config.contains(x1, y1):
        raise OutOfFieldError(f"ray endpoint {dst} outside field")
    dx = x1 - x0
    dy = y1 - y0
    total = float(np.hypot(dx, dy))
    if total == 0.0:
        return RayRow(_EMPTY_I, _EMPTY, 0.0)

    # Parameter values t in (0, 1) where the segment crosses interior gridlines.
    cuts = [np.array([0.0, 1.0])]
    if dx != 0.0:
        xs = np.arange(1, config.grid_w1) * config.cell_width
        tx = (xs - x0) / dx
        cuts.append(tx[(tx > 0.0) & (tx < 1.0)])
    if dy != 0.0:
        ys = np.arange(1, config.grid_w2) * config.cell_height
        ty = (ys - y0) / dy
        cuts.append(ty[(ty > 0.0) & (ty < 1.0)])
    t = np.unique(np.concatenate(cuts))

    seg = np.diff(t) * total
    tm = 0.5 * (t[:-1] + t[1:])
    mid = np.column_stack((x0 + tm * dx, y0 + tm * dy))
    # Guard against midpoints drifting out of range by rounding.
    np.clip(mid[:, 0], 0.0, config.width_km, out=mid[:, 0])
    np.clip(mid[:, 1], 0.0, config.height_km, out=mid[:, 1])
    cell_idx = cells_of(mid, config)

    keep = seg > 0.0
    cells, inv = np.unique(cell_idx[keep], return_inverse=True)
    lengths = np.bincount(inv, weights=seg[keep])
    return RayRow(cells, lengths, total)


def assemble_event_matrix(
    src: tuple[float, float], sensors: SensorArray, config: FieldConfig
) -> RayMatrix:
    """Rays from one event source to every sensor."""
    rows = tuple(trace_ray(src, pos, config) for pos in sensors.positions)
    return RayMatrix(rows)
