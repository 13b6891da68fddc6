"""Command-line entry point: ``python -m lengthpi <subcommand> ...``.

Exit codes: 0 success, 2 invalid configuration, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import experiments as ex
from .core import LabeledDataset, SeededRng, UnlabeledDataset
from .predictor import fit_coverage_pi, fit_length_pi, write_predictions
from .synthetic import benchmark_model, read_csv, sample, write_csv

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def _k(value):
    return value if value == "auto" else int(value)


def _common(p, *, lists=True):
    nargs = "+" if lists else None
    p.add_argument("--d", type=int, nargs=nargs)
    p.add_argument("--ell", type=float, nargs=nargs)
    p.add_argument("--beta", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--N", type=int, nargs=nargs)
    p.add_argument("--M", type=int)
    p.add_argument("--T", type=int)
    p.add_argument("--reps", type=int)
    p.add_argument("--k", type=_k)
    p.add_argument("--u", type=float)
    p.add_argument("--s-mode", dest="s_mode", choices=("theory", "practice"))
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=Path)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lengthpi", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("table1", "true-density interval: length and error per (d, ell)"),
        ("table2", "kNN plug-in interval: length and error per (d, ell)"),
        ("compare", "length-calibrated vs coverage-calibrated intervals across N"),
        ("length-scaling", "mean |expected length - ell| against N"),
    ):
        _common(sub.add_parser(name, help=help_))

    sim = sub.add_parser("simulate", help="draw a labeled dataset from the simulation model")
    sim.add_argument("--d", type=int, default=1)
    sim.add_argument("--n", type=int, default=500)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--stream", type=int, default=0)
    sim.add_argument("--unlabeled", action="store_true", help="omit the y column")
    sim.add_argument("--out", type=Path, required=True)

    pred = sub.add_parser("predict", help="fit on CSV data and write prediction intervals")
    pred.add_argument("--train", type=Path, required=True)
    pred.add_argument("--test", type=Path, required=True)
    pred.add_argument("--unlabeled", type=Path, help="features for length calibration (with --ell)")
    pred.add_argument("--calib", type=Path, help="labeled data for coverage calibration (with --beta)")
    pred.add_argument("--ell", type=float)
    pred.add_argument("--beta", type=float)
    pred.add_argument("--M", type=int)
    pred.add_argument("--k", type=_k, default="auto")
    pred.add_argument("--u", type=float, default=ex.DEFAULT_U)
    pred.add_argument("--s-mode", dest="s_mode", choices=("theory", "practice"), default="practice")
    pred.add_argument("--seed", type=int, default=0)
    pred.add_argument("--out", type=Path, required=True)
    return parser


_FACTORIES = {
    "table1": ex.table1_config,
    "table2": ex.table2_config,
    "compare": ex.compare_config,
    "length-scaling": ex.length_scaling_config,
}


def config_from_args(args) -> ex.ExperimentConfig:
    overrides = {}
    for name in ("d", "ell", "N"):
        value = getattr(args, name)
        if value is not None:
            overrides[name] = tuple(value)
    for name in ("beta", "n", "M", "T", "reps", "k", "u", "s_mode", "seed"):
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    if args.out is not None:
        overrides["out"] = str(args.out)
    return _FACTORIES[args.command](**overrides)


def _sibling(path: Path, suffix: str) -> Path:
    return path.with_name(f"{path.stem}_{suffix}{path.suffix or '.csv'}")


def run_experiment(config: ex.ExperimentConfig) -> ex.ExperimentReport:
    name = config.experiment
    if name == "table1":
        return ex.run_oracle_table(config=config)
    if name == "table2":
        return ex.run_plugin_table(config=config)
    if name == "compare":
        return ex.run_comparison(config)
    if name == "length-scaling":
        return ex.run_length_scaling(config=config)
    raise ex.ConfigError(f"unknown experiment {name!r}")


def _print_summary(report, stream=None):
    stream = stream or sys.stdout
    print(",".join(ex.SUMMARY_HEADER), file=stream)
    for row in report.summary():
        print(",".join(ex._fmt(v) for v in row), file=stream)
    for key, value in report.extra.items():
        print(f"# {key} = {value:.6g}", file=stream)


def _predict(args) -> int:
    train = read_csv(args.train)
    test = read_csv(args.test)
    if not isinstance(train, LabeledDataset):
        raise ex.ConfigError("--train needs a y column")
    if (args.ell is None) == (args.beta is None):
        raise ex.ConfigError("give exactly one of --ell or --beta")
    rng = SeededRng(args.seed, 0)
    if args.ell is not None:
        if args.unlabeled is None:
            raise ex.ConfigError("--ell needs --unlabeled")
        calib = read_csv(args.unlabeled)
        calib = UnlabeledDataset(calib.features)
    else:
        if args.calib is None:
            raise ex.ConfigError("--beta needs --calib")
        calib = read_csv(args.calib)
        if not isinstance(calib, LabeledDataset):
            raise ex.ConfigError("--calib needs a y column")
    config = ex.ExperimentConfig("predict", k=args.k, u=args.u, s_mode=args.s_mode, M=args.M).validate()
    density = ex.fit_density(train, config, len(calib))
    if args.ell is not None:
        pi, _ = fit_length_pi(density, calib, args.ell, rng, m=args.M)
    else:
        pi = fit_coverage_pi(density, calib, args.beta, rng)
    intervals = pi.predict(test.features, rng)
    labels = test.labels if isinstance(test, LabeledDataset) else None
    write_predictions(args.out, test.features, intervals, labels)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        if args.command == "simulate":
            rng = SeededRng(args.seed, args.stream)
            data = sample(benchmark_model(args.d), args.n, rng)
            write_csv(args.out, UnlabeledDataset(data.features) if args.unlabeled else data)
            return EXIT_OK
        if args.command == "predict":
            return _predict(args)
        config = config_from_args(args)
    except (ValueError, OSError) as exc:
        print(f"lengthpi: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = run_experiment(config)
        if config.out:
            out = Path(config.out)
            report.write_long(out)
            report.write_summary(_sibling(out, "summary"))
            if config.experiment == "compare":
                report.write_plot(_sibling(out, "plot"))
        _print_summary(report)
    except Exception as exc:  # noqa: BLE001
        print(f"lengthpi: {config.experiment} failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
