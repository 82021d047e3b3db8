import numpy as np
import pytest

from seisloc.errors import OutOfFieldError, ParameterError
from seisloc.field import (
    FieldConfig,
    SlownessModel,
    WavyBarrierParams,
    build_synthetic_slowness,
    cell_of,
    load_slowness,
    place_boundary_sensors,
    save_slowness,
    unflatten,
)


@pytest.fixture
def unit10():
    return FieldConfig(1.0, 1.0, 10, 10)


class TestFieldConfig:
    def test_rejects_degenerate_grid(self):
        with pytest.raises(ParameterError):
            FieldConfig(1.0, 1.0, 1, 10)
        with pytest.raises(ParameterError):
            FieldConfig(0.0, 1.0, 10, 10)

    def test_cell_geometry(self, unit10):
        assert unit10.n_cells == 100
        assert unit10.cell_width == pytest.approx(0.1)
        assert unit10.cell_center(0) == pytest.approx((0.05, 0.05))
        assert unit10.cell_center(99) == pytest.approx((0.95, 0.95))


class TestCellOf:
    def test_origin_is_cell_zero(self, unit10):
        assert cell_of((0.0, 0.0), unit10) == 0

    def test_near_far_corner(self, unit10):
        assert cell_of((0.999, 0.999), unit10) == 99

    def test_gridline_tie_breaks_to_larger_index(self, unit10):
        assert cell_of((0.5, 0.5), unit10) == 55

    def test_max_boundary_clamps_to_last_cell(self, unit10):
        assert cell_of((1.0, 1.0), unit10) == 99

    def test_outside_rejected(self, unit10):
        with pytest.raises(OutOfFieldError):
            cell_of((1.01, 0.5), unit10)

    def test_center_round_trip_every_cell(self, unit10):
        for c in range(unit10.n_cells):
            assert cell_of(unit10.cell_center(c), unit10) == c

    def test_center_round_trip_odd_grid(self):
        cfg = FieldConfig(2.0, 1.5, 7, 13)
        for c in range(cfg.n_cells):
            assert cell_of(cfg.cell_center(c), cfg) == c


class TestSyntheticSlowness:
    def test_zero_amplitude_uniform(self, unit10):
        # Barrier set to the base slowness, so the field is uniform.
        params = WavyBarrierParams(
            base=0.3, amplitude=0.0, barrier_y_lo=0.41, barrier_y_hi=0.42, barrier_slowness=0.3
        )
        model = build_synthetic_slowness(unit10, params)
        assert np.allclose(model.values, 0.3)

    def test_default_extrema(self):
        # Oracle: evaluate the closed-form expression at every cell center.
        cfg = FieldConfig(1.0, 1.0, 100, 100)
        p = WavyBarrierParams()
        lo, hi = np.inf, -np.inf
        for i in range(100):
            for j in range(100):
                xc, yc = (i + 0.5) / 100, (j + 0.5) / 100
                if p.barrier_y_lo <= yc <= p.barrier_y_hi:
                    v = p.barrier_slowness
                else:
                    v = p.base + p.amplitude * np.sin(3 * np.pi * xc) * np.sin(3 * np.pi * yc)
                lo, hi = min(lo, v), max(hi, v)
        model = build_synthetic_slowness(cfg, p)
        assert model.values.min() == pytest.approx(lo)
        assert model.values.max() == pytest.approx(hi)
        assert lo == pytest.approx(0.22, abs=5e-3)
        assert hi == pytest.approx(0.50)

    def test_barrier_visible(self):
        cfg = FieldConfig(1.0, 1.0, 100, 100)
        model = build_synthetic_slowness(cfg)
        # Middle stripe pinned at the barrier slowness, wavy elsewhere.
        assert np.all(model.values[:, 48:52] == 0.50)
        assert model.values[:, :40].std() > 0.01

    def test_deterministic(self, unit10):
        a = build_synthetic_slowness(unit10)
        b = build_synthetic_slowness(unit10)
        assert np.array_equal(a.values, b.values)

    def test_nonpositive_rejected(self):
        with pytest.raises(ParameterError):
            WavyBarrierParams(base=0.1, amplitude=0.2)


class TestFlattening:
    def test_row_wise_layout(self, unit10):
        values = np.arange(1, 101, dtype=float).reshape(10, 10)
        model = SlownessModel(unit10, values)
        for i in range(10):
            for j in range(10):
                assert model.flattened[i * 10 + j] == values[i, j]

    def test_round_trip_various_grids(self):
        rng = np.random.default_rng(42)
        for w1, w2 in [(2, 2), (3, 7), (12, 5)]:
            cfg = FieldConfig(1.0, 1.0, w1, w2)
            values = rng.uniform(0.1, 1.0, size=(w1, w2))
            model = SlownessModel(cfg, values)
            assert np.array_equal(unflatten(model.flattened, cfg).values, values)


class TestSensors:
    def test_unit_field_positions(self, unit10):
        sensors = place_boundary_sensors(unit10)
        got = {tuple(p) for p in sensors.positions}
        assert got == {
            (0, 0), (1, 0), (0, 1), (1, 1),
            (0.5, 0), (0.5, 1), (0, 0.5), (1, 0.5),
        }

    def test_always_eight(self):
        for cfg in [FieldConfig(1, 1, 5, 5), FieldConfig(3, 2, 4, 4)]:
            assert place_boundary_sensors(cfg).count == 8

    def test_scaled_field_midpoints(self):
        cfg = FieldConfig(2.0, 1.0, 4, 4)
        got = {tuple(p) for p in place_boundary_sensors(cfg).positions}
        assert {(1.0, 0.0), (1.0, 1.0), (0.0, 0.5), (2.0, 0.5)} <= got


class TestSlownessFile:
    def test_round_trip_bit_exact(self, tmp_path, unit10):
        model = build_synthetic_slowness(unit10)
        path = tmp_path / "model.txt"
        save_slowness(path, model)
        loaded = load_slowness(path)
        assert loaded.config == unit10
        assert np.array_equal(loaded.values, model.values)

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("10 10 1.0\n")
        from seisloc.errors import FormatError

        with pytest.raises(FormatError):
            load_slowness(path)
