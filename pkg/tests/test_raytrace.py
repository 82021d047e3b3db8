import numpy as np
import pytest

from seisloc.errors import OutOfFieldError
from seisloc.field import FieldConfig, cell_of, place_boundary_sensors
from seisloc.raytrace import assemble_event_matrix, trace_ray


def sampling_oracle(src, dst, config, samples=1_000_000):
    """Accumulate ds per containing cell over equally spaced segment points."""
    src = np.asarray(src, float)
    dst = np.asarray(dst, float)
    t = (np.arange(samples) + 0.5) / samples
    pts = src + t[:, None] * (dst - src)
    ds = np.linalg.norm(dst - src) / samples
    i = np.minimum((pts[:, 0] * config.grid_w1 / config.width_km).astype(int), config.grid_w1 - 1)
    j = np.minimum((pts[:, 1] * config.grid_w2 / config.height_km).astype(int), config.grid_w2 - 1)
    flat = i * config.grid_w2 + j
    counts = np.bincount(flat, minlength=config.n_cells)
    return {c: counts[c] * ds for c in np.flatnonzero(counts)}


@pytest.fixture
def unit10():
    return FieldConfig(1.0, 1.0, 10, 10)


class TestTraceRay:
    def test_degenerate_ray_empty(self, unit10):
        row = trace_ray((0.5, 0.5), (0.5, 0.5), unit10)
        assert row.total_length == 0.0
        assert row.cells.size == 0

    def test_axis_aligned_bottom_row(self, unit10):
        row = trace_ray((0.05, 0.05), (0.95, 0.05), unit10)
        got = row.as_dict()
        # Bottom row has flat indices 0, 10, ..., 90.
        assert set(got) == {10 * i for i in range(10)}
        assert got[0] == pytest.approx(0.05)
        assert got[90] == pytest.approx(0.05)
        for i in range(1, 9):
            assert got[10 * i] == pytest.approx(0.10)
        assert row.total_length == pytest.approx(0.90)

    def test_against_sampling_oracle(self, unit10):
        row = trace_ray((0.12, 0.33), (0.87, 0.61), unit10)
        expected = sampling_oracle((0.12, 0.33), (0.87, 0.61), unit10)
        assert set(row.as_dict()) == set(expected)
        for cell, length in row.as_dict().items():
            assert length == pytest.approx(expected[cell], abs=1e-4)

    def test_random_rays_against_oracle(self, unit10):
        rng = np.random.default_rng(7)
        for _ in range(5):
            a, b = rng.uniform(0.02, 0.98, 2), rng.uniform(0.02, 0.98, 2)
            row = trace_ray(tuple(a), tuple(b), unit10)
            expected = sampling_oracle(a, b, unit10, samples=200_000)
            for cell, length in row.as_dict().items():
                assert length == pytest.approx(expected.get(cell, 0.0), abs=5e-4)
            # Cell locality: every credited cell shows up in the oracle too.
            assert set(row.as_dict()) <= set(expected)

    def test_length_conservation_1000_random_rays(self):
        cfg = FieldConfig(1.0, 1.0, 20, 20)
        rng = np.random.default_rng(1)
        for _ in range(1000):
            a, b = rng.uniform(0, 1, 2), rng.uniform(0, 1, 2)
            row = trace_ray(tuple(a), tuple(b), cfg)
            dist = np.hypot(*(a - b))
            assert abs(row.lengths.sum() - dist) <= 1e-6 * max(dist, 1e-30)

    def test_symmetry(self, unit10):
        rng = np.random.default_rng(3)
        for _ in range(50):
            a, b = rng.uniform(0, 1, 2), rng.uniform(0, 1, 2)
            fwd = trace_ray(tuple(a), tuple(b), unit10).as_dict()
            rev = trace_ray(tuple(b), tuple(a), unit10).as_dict()
            assert set(fwd) == set(rev)
            for cell in fwd:
                assert fwd[cell] == pytest.approx(rev[cell], abs=1e-12)

    def test_endpoint_outside_rejected(self, unit10):
        with pytest.raises(OutOfFieldError):
            trace_ray((-0.1, 0.5), (0.5, 0.5), unit10)
        with pytest.raises(OutOfFieldError):
            trace_ray((0.5, 0.5), (0.5, 1.2), unit10)


class TestEventMatrix:
    def test_center_to_boundary_distances(self, unit10):
        sensors = place_boundary_sensors(unit10)
        matrix = assemble_event_matrix((0.5, 0.5), sensors, unit10)
        for row, pos in zip(matrix.rows, sensors.positions):
            expected = np.hypot(pos[0] - 0.5, pos[1] - 0.5)
            assert row.total_length == pytest.approx(expected)
        totals = sorted(r.total_length for r in matrix.rows)
        assert totals[:4] == pytest.approx([0.5] * 4)
        assert totals[4:] == pytest.approx([np.sqrt(0.5)] * 4)

    def test_source_on_sensor(self, unit10):
        sensors = place_boundary_sensors(unit10)
        matrix = assemble_event_matrix(tuple(sensors.positions[0]), sensors, unit10)
        assert matrix.rows[0].total_length == 0.0
        assert matrix.rows[0].cells.size == 0

    def test_row_totals_match_distance(self, unit10):
        rng = np.random.default_rng(11)
        sensors = place_boundary_sensors(unit10)
        for _ in range(20):
            src = rng.uniform(0, 1, 2)
            matrix = assemble_event_matrix(tuple(src), sensors, unit10)
            for row, pos in zip(matrix.rows, sensors.positions):
                assert abs(row.total_length - np.hypot(*(pos - src))) <= 1e-9
