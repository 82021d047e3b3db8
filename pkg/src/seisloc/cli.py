"""Command-line interface: field generation, simulation, model fitting,
training, localization, and the benchmark suite.

Every experiment subcommand accepts ``--config FILE`` (flat ``key = value``
sections, one per command, plus ``[common]``) and per-key flags of the same
name; flags win over the file.  ``SEISLOC_OUTPUT_DIR`` sets the default
output directory.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields

import numpy as np

from .errors import FormatError, SeislocError
from .experiments import (
    ExperimentConfig,
    _coerce,
    load_config,
    plot_csv,
    run_de_bench,
    run_fig9,
    run_noise_sweep,
    run_ratio,
)
from .field import (
    FieldConfig,
    WavyBarrierParams,
    build_synthetic_slowness,
    load_slowness,
    place_boundary_sensors,
    save_slowness,
)
from .learn.augment import generate_augmented
from .learn.mlp import load_mlp, save_mlp, train_mlp, MlpHyper
from .learn.svm import load_svm, save_svm, train_svm
from .locate import DeConfig, de_localize
from .polydemo import demo_pipeline
from .simulate import NoiseSpec, load_dataset, make_dataset, sample_real_events, save_dataset
from .tomo import default_prior, estimate_slowness, stack_events


def _add_field_args(sub):
    sub.add_argument("--width-km", type=float, default=1.0)
    sub.add_argument("--height-km", type=float, default=1.0)
    sub.add_argument("--grid-w1", type=int, default=20)
    sub.add_argument("--grid-w2", type=int, default=20)


def _field_from_args(args) -> FieldConfig:
    return FieldConfig(args.width_km, args.height_km, args.grid_w1, args.grid_w2)


def cmd_gen_field(args) -> int:
    config = _field_from_args(args)
    params = WavyBarrierParams(
        base=args.base,
        amplitude=args.amplitude,
        barrier_slowness=args.barrier_slowness,
    )
    model = build_synthetic_slowness(config, params)
    save_slowness(args.out, model)
    print(f"wrote {args.out}")
    return 0


def cmd_simulate(args) -> int:
    model = load_slowness(args.field)
    sensors = place_boundary_sensors(model.config)
    rng = np.random.default_rng(args.seed)
    sources = sample_real_events(args.count, model.config, args.sigma_km, rng)
    dataset = make_dataset(sources, model, sensors, NoiseSpec(xi=args.xi), rng)
    save_dataset(args.out, dataset)
    print(f"wrote {args.out} ({len(dataset)} events)")
    return 0


def cmd_tomo(args) -> int:
    truth = load_slowness(args.field)
    sensors = place_boundary_sensors(truth.config)
    rng = np.random.default_rng(args.seed)
    from .experiments import simulate_events

    sources = sample_real_events(args.count, truth.config, args.sigma_km, rng)
    matrices, noisy_times, _ = simulate_events(
        sources, truth, sensors, NoiseSpec(xi=args.xi), rng
    )
    tomo_input = stack_events(matrices, noisy_times, truth.config)
    prior = default_prior(truth.config, xi=args.xi, mean_time=float(np.mean(tomo_input.times)))
    s_hat = estimate_slowness(tomo_input, prior)
    save_slowness(args.out, s_hat)
    rel = float(
        np.linalg.norm(s_hat.flattened - truth.flattened) / np.linalg.norm(truth.flattened)
    )
    print(f"wrote {args.out} (relative error vs input field: {rel:.4f})")
    return 0


def cmd_train(args) -> int:
    field = load_slowness(args.field).config
    dataset = load_dataset(args.data, field)
    rng = np.random.default_rng(args.seed)
    if args.classifier == "mlp":
        hidden = tuple(int(v) for v in args.hidden.split(",") if v.strip())
        model = train_mlp(dataset, MlpHyper(hidden=hidden, epochs=args.epochs), rng)
        save_mlp(args.out, model)
    else:
        model = train_svm(dataset, c_grid=[args.svm_c], gamma_grid=[args.svm_gamma], rng=rng)
        save_svm(args.out, model)
    print(f"wrote {args.out}")
    return 0


def cmd_augment(args) -> int:
    s_hat = load_slowness(args.field)
    sensors = place_boundary_sensors(s_hat.config)
    rng = np.random.default_rng(args.seed)
    dataset = generate_augmented(
        s_hat, args.count, sensors, NoiseSpec(xi=args.xi), rng,
        inject_noise=args.inject_noise,
    )
    save_dataset(args.out, dataset)
    print(f"wrote {args.out} ({len(dataset)} synthetic events)")
    return 0


def _load_model(path):
    with np.load(path, allow_pickle=False) as data:
        if "meta" not in data:
            raise FormatError(f"{path}: missing model metadata")
        tag = json.loads(str(data["meta"])).get("format", "")
    if tag == "seisloc-mlp-v1":
        return load_mlp(path)
    if tag == "seisloc-svm-v1":
        return load_svm(path)
    raise FormatError(f"{path}: unknown model format {tag!r}")


def cmd_evaluate(args) -> int:
    field = load_slowness(args.field).config
    dataset = load_dataset(args.data, field)
    model = _load_model(args.model)
    acc = float(np.mean(model.predict(dataset.features) == dataset.labels))
    print(f"accuracy {acc:.4f} on {len(dataset)} events")
    return 0


def cmd_de_localize(args) -> int:
    s_hat = load_slowness(args.field)
    sensors = place_boundary_sensors(s_hat.config)
    feature = np.array([float(v) for v in args.feature.split(",")])
    point, cell, cost = de_localize(feature, s_hat, sensors, DeConfig(seed=args.seed))
    print(f"x={point[0]!r} y={point[1]!r} cell={cell} cost={cost!r}")
    return 0


def cmd_demo_polynomial(args) -> int:
    report = demo_pipeline(seed=args.seed)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("source_acc_on_target,augmented_acc_on_target\n")
            fh.write(f"{report.source_acc_on_target!r},{report.augmented_acc_on_target!r}\n")
        print(f"wrote {args.out}")
    print(
        f"source-only accuracy on target: {report.source_acc_on_target:.4f}; "
        f"retrained on transformed data: {report.augmented_acc_on_target:.4f}"
    )
    return 0


def cmd_plot(args) -> int:
    out = plot_csv(args.csv, args.out)
    print(f"wrote {out}")
    return 0


_EXPERIMENT_RUNNERS = {
    "fig9": run_fig9,
    "ratio": run_ratio,
    "noise-sweep": run_noise_sweep,
    "de-bench": run_de_bench,
}


def _add_experiment_args(sub):
    sub.add_argument("--config", default=None, help="key = value config file")
    sub.add_argument("--out", default=None, help="output CSV path")
    for f in fields(ExperimentConfig):
        flag = "--" + f.name.replace("_", "-")
        sub.add_argument(flag, dest=f.name, default=None, metavar="V")


def _experiment_config(args, section: str) -> ExperimentConfig:
    overrides = {}
    for f in fields(ExperimentConfig):
        raw = getattr(args, f.name, None)
        if raw is not None:
            overrides[f.name] = _coerce(f.name, raw) if isinstance(raw, str) else raw
    return load_config(args.config, section=section, overrides=overrides)


def cmd_experiment(args) -> int:
    cfg = _experiment_config(args, args.command)
    runner = _EXPERIMENT_RUNNERS[args.command]
    if args.command == "ratio":
        path = runner(cfg, sweep_csv=args.from_sweep, path=args.out)
    else:
        path = runner(cfg, path=args.out)
    print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seisloc",
        description="TDoA seismic source localization benchmark suite",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("gen-field", help="write a synthetic slowness field")
    _add_field_args(sub)
    sub.add_argument("--base", type=float, default=0.30)
    sub.add_argument("--amplitude", type=float, default=0.08)
    sub.add_argument("--barrier-slowness", type=float, default=0.50)
    sub.add_argument("--out", required=True)
    sub.set_defaults(func=cmd_gen_field)

    sub = subs.add_parser("simulate", help="simulate labeled fingerprint events")
    sub.add_argument("--field", required=True, help="slowness file")
    sub.add_argument("--count", type=int, default=100)
    sub.add_argument("--xi", type=float, default=0.02)
    sub.add_argument("--sigma-km", type=float, default=0.3)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", required=True)
    sub.set_defaults(func=cmd_simulate)

    sub = subs.add_parser("tomo", help="estimate the slowness model from L events")
    sub.add_argument("--field", required=True, help="ground-truth slowness file")
    sub.add_argument("--count", type=int, default=100)
    sub.add_argument("--xi", type=float, default=0.02)
    sub.add_argument("--sigma-km", type=float, default=0.3)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", required=True)
    sub.set_defaults(func=cmd_tomo)

    sub = subs.add_parser("train", help="train a grid-cell classifier on a dataset")
    sub.add_argument("--field", required=True, help="slowness file fixing the grid")
    sub.add_argument("--data", required=True, help="dataset CSV")
    sub.add_argument("--classifier", choices=("mlp", "svm"), default="mlp")
    sub.add_argument("--hidden", default="256,128")
    sub.add_argument("--epochs", type=int, default=30)
    sub.add_argument("--svm-c", type=float, default=32.0)
    sub.add_argument("--svm-gamma", type=float, default=2.0)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", required=True)
    sub.set_defaults(func=cmd_train)

    sub = subs.add_parser("augment", help="synthesize fingerprints from an estimated field")
    sub.add_argument("--field", required=True, help="estimated slowness file")
    sub.add_argument("--count", type=int, default=1000)
    sub.add_argument("--xi", type=float, default=0.02)
    sub.add_argument("--inject-noise", action="store_true")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", required=True)
    sub.set_defaults(func=cmd_augment)

    sub = subs.add_parser("evaluate", help="score a trained model on a dataset")
    sub.add_argument("--field", required=True)
    sub.add_argument("--data", required=True)
    sub.add_argument("--model", required=True)
    sub.set_defaults(func=cmd_evaluate)

    sub = subs.add_parser("de-localize", help="localize one fingerprint by optimization")
    sub.add_argument("--field", required=True, help="estimated slowness file")
    sub.add_argument("--feature", required=True, help="comma-separated TDoA values")
    sub.add_argument("--seed", type=int, default=0)
    sub.set_defaults(func=cmd_de_localize)

    for name, help_text in (
        ("fig9", "accuracy vs training volume sweep"),
        ("ratio", "matched-accuracy data-volume ratios"),
        ("noise-sweep", "noise-level sweep with data ratios"),
        ("de-bench", "optimizer vs classifier inference benchmark"),
    ):
        sub = subs.add_parser(name, help=help_text)
        _add_experiment_args(sub)
        if name == "ratio":
            sub.add_argument("--from-sweep", default=None,
                             help="reuse an existing accuracy sweep CSV")
        sub.set_defaults(func=cmd_experiment)

    sub = subs.add_parser("demo-polynomial", help="polynomial domain-shift workflow demo")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", default=None)
    sub.set_defaults(func=cmd_demo_polynomial)

    sub = subs.add_parser("plot", help="render a benchmark CSV as an SVG chart")
    sub.add_argument("csv")
    sub.add_argument("--out", default=None)
    sub.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SeislocError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
