"""Benchmark harness: accuracy sweeps, data-volume ratios, noise sweeps, and
the optimizer-vs-classifier inference benchmark.

Every run is deterministic for a given configuration: each trial derives its
own RNG from (master seed, trial coordinates), results are gathered by trial
index, and CSV floats are written with ``repr``.  Timing columns are the only
nondeterministic outputs.
"""

from __future__ import annotations

import configparser
import os
import time
from dataclasses import dataclass, fields, replace

import numpy as np

from .errors import FormatError, ParameterError
from .field import (
    FieldConfig,
    SensorArray,
    SlownessModel,
    build_synthetic_slowness,
    place_boundary_sensors,
)
from .learn.augment import AugmentConfig, augmentation_schedule
from .learn.mlp import MlpHyper, train_mlp
from .learn.svm import train_svm
from .locate import DeConfig, de_cost, de_localize, localization_error
from .raytrace import assemble_event_matrix
from .simulate import (
    Dataset,
    NoiseSpec,
    add_noise,
    make_dataset,
    propagation_times,
    sample_real_events,
    tdoa_from_times,
)
from .svgplot import Chart, Series, save_chart
from .tomo import default_prior, estimate_slowness, stack_events

OUTPUT_DIR_ENV = "SEISLOC_OUTPUT_DIR"

UNREACHABLE = "unreachable"


@dataclass(frozen=True)
class ExperimentConfig:
    """Desk-scale experiment knobs; every field maps to a config-file key."""

    width_km: float = 1.0
    height_km: float = 1.0
    grid_w1: int = 20
    grid_w2: int = 20
    xi: float = 0.02
    sigma_km: float = 0.05  # spread of real-event sources around the center
    test_events: int = 2000
    seeds: int = 1
    master_seed: int = 0
    classifiers: tuple[str, ...] = ("mlp", "svm")
    baseline_l: tuple[int, ...] = (2000, 8000)
    augmented_l: tuple[int, ...] = (50, 100, 400)
    # Augmented-pool sizing: X = factor * n_cells, doubled up to `rounds` times.
    augment_factor: int = 100
    svm_augment_factor: int = 20
    augment_rounds: int = 1
    augment_threshold: float = 0.005
    augment_inject_noise: bool = True
    mlp_hidden: tuple[int, ...] = (512, 256)
    mlp_epochs: int = 200
    mlp_batch: int = 128
    mlp_dropout: float = 0.1
    mlp_patience: int = 40
    mlp_float32: bool = True
    svm_c: float = 32.0
    svm_gamma: float = 2.0
    noise_xis: tuple[float, ...] = (0.0, 0.02, 0.04, 0.06, 0.08)
    noise_l: int = 2000
    noise_seeds: int = 3
    noise_baseline_l: tuple[int, ...] = (500, 1000, 2000, 4000)
    noise_augmented_l: tuple[int, ...] = (25, 50, 100, 200)
    noise_ratio_xis: tuple[float, ...] = (0.0, 0.08)
    de_n_values: tuple[int, ...] = (100, 400, 900, 2500)
    de_events: int = 100
    de_train_factor: int = 10
    output_dir: str = ""

    def __post_init__(self) -> None:
        if self.seeds < 1 or self.noise_seeds < 1:
            raise ParameterError("seed counts must be at least 1")
        for name in ("classifiers", "baseline_l", "augmented_l", "noise_xis", "de_n_values"):
            if not getattr(self, name):
                raise ParameterError(f"{name} sweep must be non-empty")
        for c in self.classifiers:
            if c not in ("mlp", "svm"):
                raise ParameterError(f"unknown classifier {c!r}")

    def resolve_output_dir(self) -> str:
        return self.output_dir or os.environ.get(OUTPUT_DIR_ENV, ".")


# -- configuration file -------------------------------------------------------

_TUPLE_INT = {"baseline_l", "augmented_l", "mlp_hidden", "de_n_values",
              "noise_baseline_l", "noise_augmented_l"}
_TUPLE_FLOAT = {"noise_xis", "noise_ratio_xis"}
_TUPLE_STR = {"classifiers"}


def _coerce(name: str, raw: str):
    raw = raw.strip()
    if name in _TUPLE_INT:
        return tuple(int(v) for v in raw.split(",") if v.strip())
    if name in _TUPLE_FLOAT:
        return tuple(float(v) for v in raw.split(",") if v.strip())
    if name in _TUPLE_STR:
        return tuple(v.strip() for v in raw.split(",") if v.strip())
    kind = ExperimentConfig.__dataclass_fields__[name].type
    if kind == "bool":
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise FormatError(f"config key {name}: expected a boolean, got {raw!r}")
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    return raw


def load_config(path, section: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Build a configuration from a ``key = value`` file.

    Keys in ``[common]`` apply to every command; a per-command section named
    after the subcommand refines them.  ``overrides`` (parsed command-line
    flags) win over both.
    """
    values: dict = {}
    if path is not None:
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise FormatError(f"{path}: cannot read config file")
        for sect in ("common", section):
            if sect and parser.has_section(sect):
                for key, raw in parser.items(sect):
                    if key not in ExperimentConfig.__dataclass_fields__:
                        raise FormatError(f"{path}: unknown config key {key!r}")
                    values[key] = _coerce(key, raw)
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)


# -- common plumbing ----------------------------------------------------------

def make_world(cfg: ExperimentConfig, n_cells: int | None = None):
    """Ground-truth field, slowness model, and sensor array."""
    if n_cells is None:
        field = FieldConfig(cfg.width_km, cfg.height_km, cfg.grid_w1, cfg.grid_w2)
    else:
        side = int(round(np.sqrt(n_cells)))
        if side * side != n_cells:
            raise ParameterError(f"n_cells {n_cells} is not a perfect square")
        field = FieldConfig(cfg.width_km, cfg.height_km, side, side)
    truth = build_synthetic_slowness(field)
    sensors = place_boundary_sensors(field)
    return field, truth, sensors


def _rng(cfg: ExperimentConfig, *coords: int) -> np.random.Generator:
    return np.random.default_rng([cfg.master_seed, *coords])


def simulate_events(sources, truth, sensors, spec, rng):
    """Per-event ray matrices, noisy arrival times, and the fingerprint dataset."""
    matrices, noisy_times, features = [], [], []
    for src in sources:
        matrix = assemble_event_matrix(src, sensors, truth.config)
        t = add_noise(propagation_times(matrix, truth), spec, rng)
        matrices.append(matrix)
        noisy_times.append(t)
        features.append(tdoa_from_times(t))
    from .field import cells_of

    dataset = Dataset(
        np.array(features),
        cells_of(np.asarray(sources), truth.config),
        np.asarray(sources, dtype=float).copy(),
        np.full(len(sources), "real", dtype=object),
        sensors.count,
        truth.config,
    )
    return matrices, noisy_times, dataset


def fit_slowness_from_events(matrices, noisy_times, field, xi):
    """Estimate the slowness model from L labeled events (the fitting step)."""
    tomo_input = stack_events(matrices, noisy_times, field)
    mean_time = float(np.mean(tomo_input.times))
    prior = default_prior(field, xi=xi, mean_time=mean_time)
    return estimate_slowness(tomo_input, prior)


def make_trainer(cfg: ExperimentConfig, classifier: str):
    """Callable (Dataset, rng) -> fitted model for the named classifier."""
    if classifier == "mlp":
        hyper = MlpHyper(
            hidden=tuple(cfg.mlp_hidden),
            batch_size=cfg.mlp_batch,
            epochs=cfg.mlp_epochs,
            dropout=cfg.mlp_dropout,
            patience=cfg.mlp_patience,
            dtype=np.dtype(np.float32 if cfg.mlp_float32 else np.float64),
        )
        return lambda train, rng: train_mlp(train, hyper, rng)
    if classifier == "svm":
        return lambda train, rng: train_svm(
            train, c_grid=[cfg.svm_c], gamma_grid=[cfg.svm_gamma], rng=rng
        )
    raise ParameterError(f"unknown classifier {classifier!r}")


def make_test_set(cfg: ExperimentConfig, truth, sensors, xi, seed: int) -> Dataset:
    rng = _rng(cfg, 7001, seed, int(round(xi * 1000)))
    sources = sample_real_events(cfg.test_events, truth.config, cfg.sigma_km, rng)
    return make_dataset(sources, truth, sensors, NoiseSpec(xi=xi), rng)


def run_point(
    cfg: ExperimentConfig,
    classifier: str,
    augmented: bool,
    l_value: int,
    seed: int,
    xi: float | None = None,
    world=None,
) -> float:
    """Accuracy of one (classifier, pipeline, L, seed) trial."""
    if xi is None:
        xi = cfg.xi
    if world is None:
        world = make_world(cfg)
    field, truth, sensors = world
    spec = NoiseSpec(xi=xi)
    rng = _rng(cfg, 1001, seed, l_value, int(augmented), int(round(xi * 1000)),
               0 if classifier == "mlp" else 1)
    sources = sample_real_events(l_value, field, cfg.sigma_km, rng)
    matrices, noisy_times, real = simulate_events(sources, truth, sensors, spec, rng)
    trainer = make_trainer(cfg, classifier)
    if augmented:
        s_hat = fit_slowness_from_events(matrices, noisy_times, field, xi)
        factor = cfg.svm_augment_factor if classifier == "svm" else cfg.augment_factor
        aug_cfg = AugmentConfig(
            initial_factor=factor,
            threshold=cfg.augment_threshold,
            max_rounds=cfg.augment_rounds,
            inject_noise=cfg.augment_inject_noise,
        )
        model, _, _ = augmentation_schedule(s_hat, real, trainer, aug_cfg, sensors, spec, rng)
    else:
        model = trainer(real, rng)
    test = make_test_set(cfg, truth, sensors, xi, seed)
    return float(np.mean(model.predict(test.features) == test.labels))


# -- CSV plumbing -------------------------------------------------------------

def _cell(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path, header: list[str], rows: list[list]) -> None:
    try:
        with open(path, "w") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_cell(v) for v in row) + "\n")
    except OSError as exc:
        raise FormatError(f"cannot write {path}: {exc}") from exc


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path) as fh:
            header = fh.readline().strip().split(",")
            rows = [line.strip().split(",") for line in fh if line.strip()]
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    return header, rows


# -- accuracy-vs-volume sweep -------------------------------------------------

FIG9_HEADER = ["classifier", "augmented", "L", "seed", "accuracy"]


def accuracy_sweep_rows(cfg: ExperimentConfig) -> list[list]:
    """The full L sweep: classifiers x {baseline, augmented} x L x seeds."""
    world = make_world(cfg)
    rows = []
    for classifier in cfg.classifiers:
        for augmented, l_values in ((False, cfg.baseline_l), (True, cfg.augmented_l)):
            for l_value in l_values:
                for seed in range(cfg.seeds):
                    acc = run_point(cfg, classifier, augmented, l_value, seed,
                                    world=world)
                    rows.append([classifier, augmented, l_value, seed, acc])
    return rows


def run_fig9(cfg: ExperimentConfig, path=None) -> str:
    if path is None:
        path = os.path.join(cfg.resolve_output_dir(), "accuracy_vs_L.csv")
    write_csv(path, FIG9_HEADER, accuracy_sweep_rows(cfg))
    return path


# -- required-data ratio ------------------------------------------------------

RATIO_HEADER = ["classifier", "level", "baseline_l", "augmented_l", "ratio"]


def _mean_curve(rows, classifier, augmented):
    """L -> mean accuracy over seeds, as sorted (L, acc) pairs."""
    acc: dict[int, list[float]] = {}
    for r_classifier, r_aug, l_value, _seed, r_acc in rows:
        if r_classifier == classifier and r_aug == augmented:
            acc.setdefault(int(l_value), []).append(float(r_acc))
    return sorted((l_value, float(np.mean(v))) for l_value, v in acc.items())


def _min_l_reaching(curve, level):
    hits = [l_value for l_value, acc in curve if acc >= level - 1e-12]
    return min(hits) if hits else None


def ratio_rows_from_sweep(rows) -> list[list]:
    """Matched-accuracy data-volume ratios derived from an accuracy sweep.

    Levels are the baseline curve's mean accuracies; for each, the smallest L
    on each curve that reaches the level, and their ratio.
    """
    classifiers = sorted({r[0] for r in rows})
    out = []
    for classifier in classifiers:
        baseline = _mean_curve(rows, classifier, False)
        augmented = _mean_curve(rows, classifier, True)
        for level in sorted({acc for _l, acc in baseline}):
            l_base = _min_l_reaching(baseline, level)
            l_aug = _min_l_reaching(augmented, level)
            if l_base is None or l_aug is None:
                out.append([classifier, level, l_base or UNREACHABLE,
                            UNREACHABLE, UNREACHABLE])
            else:
                out.append([classifier, level, l_base, l_aug, l_aug / l_base])
    return out


def run_ratio(cfg: ExperimentConfig, sweep_csv=None, path=None) -> str:
    if path is None:
        path = os.path.join(cfg.resolve_output_dir(), "ratio_vs_accuracy.csv")
    if sweep_csv is not None:
        header, raw = read_csv(sweep_csv)
        if header != FIG9_HEADER:
            raise FormatError(f"{sweep_csv}: expected header {FIG9_HEADER}, got {header}")
        rows = [[r[0], r[1] == "1", int(r[2]), int(r[3]), float(r[4])] for r in raw]
    else:
        rows = accuracy_sweep_rows(cfg)
    write_csv(path, RATIO_HEADER, ratio_rows_from_sweep(rows))
    return path


def common_level_ratios(rows, classifier) -> list[tuple[float, float]]:
    """(level, augmented L / baseline L) at every common achievable level.

    Levels are the baseline mean-curve accuracies that the augmented mean
    curve also reaches.
    """
    baseline = _mean_curve(rows, classifier, False)
    augmented = _mean_curve(rows, classifier, True)
    out = []
    for level in sorted({acc for _l, acc in baseline}):
        l_base = _min_l_reaching(baseline, level)
        l_aug = _min_l_reaching(augmented, level)
        if l_base is not None and l_aug is not None:
            out.append((level, l_aug / l_base))
    return out


def headline_ratio(rows, classifier) -> float | None:
    """Augmented/baseline data ratio at the highest common achievable accuracy."""
    ratios = common_level_ratios(rows, classifier)
    if not ratios:
        return None
    return ratios[-1][1]


# -- noise sweep --------------------------------------------------------------

NOISE_HEADER = ["record", "xi", "classifier", "augmented", "L", "seed", "value"]


def noise_sweep_rows(cfg: ExperimentConfig) -> list[list]:
    """Accuracy records over the noise sweep plus per-seed data ratios.

    ``accuracy`` records: fixed-L accuracy per (xi, classifier, pipeline, seed).
    ``ratio`` records: per (xi, classifier, seed) matched-accuracy data ratio
    from a small L sweep at that noise level.
    """
    world = make_world(cfg)
    rows = []
    for xi in cfg.noise_xis:
        for classifier in cfg.classifiers:
            for augmented in (False, True):
                l_value = cfg.noise_l if not augmented else max(cfg.noise_augmented_l)
                for seed in range(cfg.noise_seeds):
                    acc = run_point(cfg, classifier, augmented, l_value, seed,
                                    xi=xi, world=world)
                    rows.append(["accuracy", xi, classifier, augmented, l_value, seed, acc])
    for xi in cfg.noise_ratio_xis:
        for classifier in cfg.classifiers:
            for seed in range(cfg.noise_seeds):
                sweep = []
                for augmented, l_values in (
                    (False, cfg.noise_baseline_l),
                    (True, cfg.noise_augmented_l),
                ):
                    for l_value in l_values:
                        acc = run_point(cfg, classifier, augmented, l_value, seed,
                                        xi=xi, world=world)
                        sweep.append([classifier, augmented, l_value, seed, acc])
                ratio = headline_ratio(sweep, classifier)
                rows.append(["ratio", xi, classifier, "", "", seed,
                             ratio if ratio is not None else UNREACHABLE])
    return rows


def run_noise_sweep(cfg: ExperimentConfig, path=None) -> str:
    if path is None:
        path = os.path.join(cfg.resolve_output_dir(), "noise_sweep.csv")
    write_csv(path, NOISE_HEADER, noise_sweep_rows(cfg))
    return path


# -- optimizer-vs-classifier benchmark ---------------------------------------

DE_BENCH_HEADER = ["n", "method", "events", "mean_error_km", "mean_time_s"]


def de_bench_rows(cfg: ExperimentConfig) -> list[list]:
    """Mean per-inference wall time and localization error per method and N.

    Classifiers are trained on abundant synthetic fingerprints from the true
    model so that the comparison isolates inference behavior.  Timing runs
    single-threaded by construction.
    """
    from .learn.augment import generate_augmented

    rows = []
    for n_cells in cfg.de_n_values:
        field, truth, sensors = make_world(cfg, n_cells=n_cells)
        rng = _rng(cfg, 3001, n_cells)
        spec = NoiseSpec(xi=cfg.xi)
        train = generate_augmented(
            truth, cfg.de_train_factor * n_cells, sensors, spec, rng,
            inject_noise=cfg.augment_inject_noise,
        )
        test_sources = sample_real_events(cfg.de_events, field, cfg.sigma_km, rng)
        test = make_dataset(test_sources, truth, sensors, spec, rng)

        methods: dict[str, object] = {}
        for classifier in cfg.classifiers:
            methods[classifier] = make_trainer(cfg, classifier)(train, rng)

        for name, model in methods.items():
            errors, elapsed = [], 0.0
            for k in range(cfg.de_events):
                start = time.perf_counter()
                cell = int(model.predict(test.features[k : k + 1])[0])
                elapsed += time.perf_counter() - start
                errors.append(localization_error(field.cell_center(cell), test_sources[k]))
            rows.append([n_cells, name, cfg.de_events,
                         float(np.mean(errors)), elapsed / cfg.de_events])

        errors, elapsed = [], 0.0
        for k in range(cfg.de_events):
            start = time.perf_counter()
            point, _cell, _cost = de_localize(
                test.features[k], truth, sensors, DeConfig(seed=k)
            )
            elapsed += time.perf_counter() - start
            errors.append(localization_error(point, test_sources[k]))
        rows.append([n_cells, "de", cfg.de_events,
                     float(np.mean(errors)), elapsed / cfg.de_events])
    return rows


def run_de_bench(cfg: ExperimentConfig, path=None) -> str:
    if path is None:
        path = os.path.join(cfg.resolve_output_dir(), "de_bench.csv")
    write_csv(path, DE_BENCH_HEADER, de_bench_rows(cfg))
    return path


def exhaustive_localize(f_obs, s_hat: SlownessModel, sensors: SensorArray) -> int:
    """Oracle localization: argmin of the residual cost over all cell centers."""
    config = s_hat.config
    costs = [
        de_cost(tuple(center), f_obs, s_hat, sensors)
        for center in config.cell_centers()
    ]
    return int(np.argmin(costs))


# -- plotting -----------------------------------------------------------------

_PLOT_SCHEMAS = {
    tuple(FIG9_HEADER): ("L", "accuracy", ("classifier", "augmented"),
                         "training volume L", "accuracy"),
    tuple(RATIO_HEADER): ("level", "ratio", ("classifier",),
                          "accuracy level", "data ratio"),
    tuple(NOISE_HEADER): ("xi", "value", ("record", "classifier", "augmented"),
                          "noise level", "value"),
    tuple(DE_BENCH_HEADER): ("n", "mean_time_s", ("method",),
                             "number of grid cells", "seconds per inference"),
}


def plot_csv(csv_path, out_path=None) -> str:
    """Render one of the benchmark CSVs as a deterministic SVG line chart."""
    header, raw = read_csv(csv_path)
    schema = _PLOT_SCHEMAS.get(tuple(header))
    if schema is None:
        for known in _PLOT_SCHEMAS:
            missing = [c for c in known if c not in header]
            if len(missing) <= 2:
                raise FormatError(
                    f"{csv_path}: header {header} does not match a known "
                    f"schema; missing column(s) {missing}"
                )
        raise FormatError(f"{csv_path}: unknown CSV schema {header}")
    x_col, y_col, key_cols, x_label, y_label = schema
    col = {name: k for k, name in enumerate(header)}

    groups: dict[tuple, list[tuple[float, float]]] = {}
    for row in raw:
        try:
            x = float(row[col[x_col]])
            y = float(row[col[y_col]])
        except ValueError:
            continue  # unreachable / sentinel rows carry no point
        key = tuple(row[col[c]] for c in key_cols)
        groups.setdefault(key, []).append((x, y))

    series = []
    for key in sorted(groups):
        pts = sorted(groups[key])
        xs = sorted({x for x, _y in pts})
        ys = [float(np.mean([y for x2, y in pts if x2 == x])) for x in xs]
        series.append(Series("/".join(key), np.array(xs), np.array(ys)))

    chart = Chart(
        title=os.path.basename(str(csv_path)),
        x_label=x_label,
        y_label=y_label,
        series=series,
    )
    if out_path is None:
        out_path = str(csv_path).rsplit(".", 1)[0] + ".svg"
    save_chart(out_path, chart)
    return out_path
