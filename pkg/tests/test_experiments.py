import numpy as np
import pytest

from seisloc.errors import FormatError, ParameterError
from seisloc.experiments import (
    ExperimentConfig,
    UNREACHABLE,
    _coerce,
    _mean_curve,
    headline_ratio,
    load_config,
    make_world,
    ratio_rows_from_sweep,
    read_csv,
    run_point,
    write_csv,
)
from seisloc.svgplot import Chart, Series, render_chart


def sweep_row(classifier, augmented, L, seed, acc):
    return [classifier, augmented, L, seed, acc]


class TestConfig:
    def test_defaults_valid(self):
        cfg = ExperimentConfig()
        assert cfg.grid_w1 == 20
        assert "mlp" in cfg.classifiers

    def test_empty_sweep_rejected(self):
        with pytest.raises(ParameterError):
            ExperimentConfig(baseline_l=())

    def test_unknown_classifier_rejected(self):
        with pytest.raises(ParameterError):
            ExperimentConfig(classifiers=("forest",))

    def test_coercion(self):
        assert _coerce("baseline_l", "100, 200") == (100, 200)
        assert _coerce("noise_xis", "0.0,0.02") == (0.0, 0.02)
        assert _coerce("classifiers", "mlp") == ("mlp",)
        assert _coerce("mlp_float32", "false") is False
        assert _coerce("xi", "0.04") == 0.04
        assert _coerce("seeds", "3") == 3

    def test_file_sections_and_flag_priority(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text(
            "[common]\ngrid_w1 = 10\ngrid_w2 = 10\nxi = 0.04\n"
            "[fig9]\nseeds = 2\n"
        )
        cfg = load_config(path, section="fig9")
        assert cfg.grid_w1 == 10 and cfg.xi == 0.04 and cfg.seeds == 2
        # A flag override beats both sections.
        cfg = load_config(path, section="fig9", overrides={"xi": 0.08})
        assert cfg.xi == 0.08

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("[common]\nnot_a_key = 1\n")
        with pytest.raises(FormatError):
            load_config(path)

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(FormatError):
            load_config(tmp_path / "nope.cfg")


class TestRatioLogic:
    def test_mean_curve_averages_seeds(self):
        rows = [
            sweep_row("mlp", False, 100, 0, 0.4),
            sweep_row("mlp", False, 100, 1, 0.6),
            sweep_row("mlp", False, 200, 0, 0.8),
        ]
        assert _mean_curve(rows, "mlp", False) == [(100, 0.5), (200, 0.8)]

    def test_dominating_augmented_curve_gives_small_ratios(self):
        rows = [
            sweep_row("mlp", False, 1000, 0, 0.5),
            sweep_row("mlp", False, 2000, 0, 0.7),
            sweep_row("mlp", True, 50, 0, 0.75),
            sweep_row("mlp", True, 100, 0, 0.9),
        ]
        out = ratio_rows_from_sweep(rows)
        for _classifier, _level, _lb, _la, ratio in out:
            assert ratio <= 50 / 1000

    def test_unreachable_level_marked_not_fabricated(self):
        rows = [
            sweep_row("mlp", False, 1000, 0, 0.9),
            sweep_row("mlp", True, 50, 0, 0.5),
        ]
        out = ratio_rows_from_sweep(rows)
        assert out == [["mlp", 0.9, 1000, UNREACHABLE, UNREACHABLE]]

    def test_headline_ratio_at_best_baseline_accuracy(self):
        rows = [
            sweep_row("svm", False, 1000, 0, 0.6),
            sweep_row("svm", False, 4000, 0, 0.8),
            sweep_row("svm", True, 100, 0, 0.85),
            sweep_row("svm", True, 200, 0, 0.95),
        ]
        assert headline_ratio(rows, "svm") == pytest.approx(100 / 4000)

    def test_headline_ratio_none_when_augmented_falls_short(self):
        rows = [
            sweep_row("svm", False, 1000, 0, 0.99),
            sweep_row("svm", True, 100, 0, 0.5),
        ]
        assert headline_ratio(rows, "svm") is None


class TestCsvRoundTrip:
    def test_write_read(self, tmp_path):
        path = tmp_path / "t.csv"
        write_csv(path, ["a", "b"], [[1, 0.125], [2, True]])
        header, rows = read_csv(path)
        assert header == ["a", "b"]
        assert rows == [["1", "0.125"], ["2", "1"]]


class TestRunPoint:
    def test_deterministic_given_seed(self):
        cfg = ExperimentConfig(
            grid_w1=4, grid_w2=4, test_events=200, mlp_hidden=(16,), mlp_epochs=4
        )
        world = make_world(cfg)
        a = run_point(cfg, "mlp", False, 80, 0, world=world)
        b = run_point(cfg, "mlp", False, 80, 0, world=world)
        assert a == b

    def test_augmented_pipeline_runs(self):
        cfg = ExperimentConfig(
            grid_w1=4, grid_w2=4, test_events=200, mlp_hidden=(32,), mlp_epochs=8,
            augment_factor=20,
        )
        world = make_world(cfg)
        acc = run_point(cfg, "mlp", True, 40, 0, world=world)
        assert 0.0 <= acc <= 1.0


class TestSvgRender:
    def test_empty_chart_has_axes_only(self):
        svg = render_chart(Chart(title="empty"))
        assert svg.startswith("<svg")
        assert "polyline" not in svg

    def test_two_point_series_single_polyline(self):
        chart = Chart(series=[Series("s", np.array([0.0, 1.0]), np.array([1.0, 2.0]))])
        svg = render_chart(chart)
        assert svg.count("<polyline") == 1
        points = svg.split('points="')[1].split('"')[0]
        assert len(points.split()) == 2

    def test_deterministic(self):
        chart = Chart(
            title="t",
            series=[Series("a", np.arange(5.0), np.arange(5.0) ** 2)],
        )
        assert render_chart(chart) == render_chart(chart)

    def test_escapes_markup(self):
        svg = render_chart(Chart(title="a<b&c"))
        assert "a&lt;b&amp;c" in svg
