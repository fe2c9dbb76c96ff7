"""Command-line interface.

Subcommands::

    gen       generate a synthetic dataset as CSV
    resample  rebalance a CSV with one strategy
    eval      one train/test/sampler/classifier cell, metrics to stdout
    bench     full experiment grid from a config file and/or flags

Data goes to stdout (or ``-o``), diagnostics to stderr. Exit status is 0 on
success, 1 on a runtime error and 2 on a usage error.
"""

import argparse
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import synthgen
from ._rng import derive_rng
from .bench.config import (CLASSIFIERS, METRICS, RAW, DatasetSource, ExperimentConfig,
                           config_from_pairs, load_config)
from .bench.harness import (classifier_params, compute_metric, run_cell, run_experiment,
                            standardize)
from .bench.report import FORMATS, emit_report, emit_summary_csv
from .classifiers import make_classifier
from .dataset import FIXTURES, LabelSpec, load_csv, load_fixture, read_csv_text, to_csv_text
from .exceptions import KdeSamplingError
from .samplers import STRATEGIES, ResampleRequest, resample

__all__ = ["main", "build_parser"]

logger = logging.getLogger("kdesampling")


def _write(data, out):
    if isinstance(data, str):
        data = data.encode("utf-8")
    if out is None or out == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        Path(out).write_bytes(data)


def _label_spec(args):
    return LabelSpec(column=args.label, positive_value=args.positive)


def _load_input(ref, args):
    """A CSV path, or the name of a bundled fixture when no such file exists."""
    if ref == "-":
        return read_csv_text(sys.stdin.read(), _label_spec(args), source="<stdin>")
    if not Path(ref).exists() and ref in FIXTURES:
        return load_fixture(ref)
    return load_csv(ref, _label_spec(args))


def _add_label_args(p):
    p.add_argument("--label", default="-1",
                   help="label column name or zero-based index (default: last column)")
    p.add_argument("--positive", default=None,
                   help="raw label value of the minority class (default: rarer value)")


def _cmd_gen(args):
    given = {
        "donut": {"n_total": args.n, "minority_fraction": args.minority_frac,
                  "side": args.side, "hole_radius": args.hole_radius,
                  "minority_sigma": args.sigma},
        "cube": {"n_majority": args.n_majority, "n_minority": args.n_minority,
                 "side": args.side, "void_radius": args.hole_radius, "sigma": args.sigma},
        "separable": {"n_majority": args.n_majority, "n_minority": args.n_minority,
                      "overlap_margin": args.margin},
    }[args.kind]
    params = {k: v for k, v in given.items() if v is not None}
    ds = synthgen.generate(args.kind, seed=args.seed, **params)
    _write(to_csv_text(ds), args.output)
    return 0


def _cmd_resample(args):
    ds = _load_input(args.input, args)
    req = ResampleRequest(strategy=args.strategy, target_ratio=args.ratio,
                          k_neighbors=args.k, seed=derive_rng(args.seed, "resample"))
    result = resample(ds, req)
    extra = {"synthetic": result.synthetic_mask.astype(int)} if args.mark_synthetic else None
    _write(to_csv_text(result.dataset, extra), args.output)
    n_maj = int(np.count_nonzero(result.dataset.labels == 0))
    n_min = result.dataset.n - n_maj
    print(f"resampled with {args.strategy}: majority={n_maj} minority={n_min}", file=sys.stderr)
    return 0


def _cmd_eval(args):
    params = (("knn.k", args.knn_k),) if args.knn_k is not None else ()
    train = _load_input(args.input, args)
    if args.test is None:
        cfg = ExperimentConfig(
            datasets=(DatasetSource("input", csv=args.input),), samplers=(args.sampler,),
            classifiers=(args.classifier,), replications=1, test_fraction=args.test_fraction,
            seed=args.seed, standardize=not args.no_standardize, params=params)
        values = run_cell(train, "input", args.sampler, args.classifier, 0, cfg)
    else:
        test = _load_input(args.test, args)
        if not args.no_standardize:
            train, test = standardize(train, test)
        if args.sampler != RAW:
            train = resample(train, ResampleRequest(
                strategy=args.sampler, seed=derive_rng(args.seed, "resample"))).dataset
        clf = make_classifier(args.classifier, **classifier_params(
            args.classifier, dict(params), derive_rng(args.seed, "classifier")))
        clf.fit(np.array(train.features), np.array(train.labels))
        scores = clf.predict_proba(test.features)[:, 1]
        pred = (scores >= 0.5).astype(np.int64)
        values = {m: compute_metric(m, test.labels, pred, scores) for m in METRICS}
    lines = [f"{m} {values[m]:.6f}" for m in METRICS if m in values]
    _write("\n".join(lines) + "\n", None)
    return 0


def _cmd_bench(args):
    overrides = []
    for flag, key in (("datasets", "datasets"), ("samplers", "samplers"),
                      ("classifiers", "classifiers"), ("metrics", "metrics"),
                      ("replications", "replications"), ("test_fraction", "test_fraction"),
                      ("workers", "workers"), ("seed", "seed"), ("target_ratio", "target_ratio")):
        v = getattr(args, flag)
        if v is not None:
            overrides.append((key, str(v)))
    if args.no_standardize:
        overrides.append(("standardize", "false"))
    for item in args.set or ():
        if "=" not in item:
            raise KdeSamplingError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        overrides.append((k.strip(), v.strip()))
    if args.config:
        cfg = load_config(args.config, overrides)
    else:
        cfg = config_from_pairs(overrides)
    report = run_experiment(cfg)
    _write(emit_report(report, args.format), args.output)
    if args.summary:
        _write(emit_summary_csv(report), args.summary)
    n_failed = sum(c.failed for c in report.cells)
    print(f"bench: {len(report.cells)} cells x {cfg.replications} replications, "
          f"{n_failed} failed", file=sys.stderr)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="kdesampling",
        description="KDE oversampling and resampling benchmarks for imbalanced data.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic dataset as CSV")
    g.add_argument("kind", choices=sorted(synthgen.GENERATORS))
    g.add_argument("--n", type=int, help="donut: total rows (default 1000)")
    g.add_argument("--minority-frac", type=float, help="donut: minority fraction (0.2)")
    g.add_argument("--n-majority", type=int, help="cube/separable: majority rows (500)")
    g.add_argument("--n-minority", type=int, help="cube/separable: minority rows (100)")
    g.add_argument("--side", type=float, help="donut/cube: side length (15)")
    g.add_argument("--hole-radius", type=float,
                   help="radius of the excluded region (donut 2, cube 1.5)")
    g.add_argument("--sigma", type=float, help="minority standard deviation (2)")
    g.add_argument("--margin", type=float, help="separable: class overlap margin")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output", help="output CSV (default: stdout)")
    g.set_defaults(func=_cmd_gen)

    r = sub.add_parser("resample", help="rebalance a CSV")
    r.add_argument("input", help="input CSV path, '-' for stdin, or a fixture name")
    _add_label_args(r)
    r.add_argument("--strategy", choices=STRATEGIES, default="kde")
    r.add_argument("--ratio", type=float, default=1.0,
                   help="target majority:minority ratio after resampling")
    r.add_argument("--k", type=int, default=None, help="neighbors for smote/adasyn/nearmiss")
    r.add_argument("--mark-synthetic", action="store_true",
                   help="append a 0/1 'synthetic' column")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("-o", "--output", help="output CSV (default: stdout)")
    r.set_defaults(func=_cmd_resample)

    e = sub.add_parser("eval", help="evaluate one sampler/classifier cell")
    e.add_argument("input", help="CSV path or fixture name; split unless --test is given")
    e.add_argument("--test", help="separate test CSV")
    _add_label_args(e)
    e.add_argument("--sampler", choices=(RAW,) + STRATEGIES, default="kde")
    e.add_argument("--classifier", choices=CLASSIFIERS, default="knn")
    e.add_argument("--knn-k", type=int, default=None)
    e.add_argument("--test-fraction", type=float, default=0.3)
    e.add_argument("--no-standardize", action="store_true")
    e.add_argument("--seed", type=int, default=0)
    e.set_defaults(func=_cmd_eval)

    b = sub.add_parser("bench", help="run an experiment grid")
    b.add_argument("--config", help="key = value config file")
    b.add_argument("--datasets")
    b.add_argument("--samplers")
    b.add_argument("--classifiers")
    b.add_argument("--metrics")
    b.add_argument("--replications", type=int)
    b.add_argument("--test-fraction", type=float)
    b.add_argument("--target-ratio", type=float)
    b.add_argument("--workers", type=int)
    b.add_argument("--no-standardize", action="store_true")
    b.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="any config key; repeatable; overrides the file")
    b.add_argument("--seed", type=int)
    b.add_argument("--format", choices=FORMATS, default="json")
    b.add_argument("-o", "--output", help="report file (default: stdout)")
    b.add_argument("--summary", help="also write a per-cell mean CSV here")
    b.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except (KdeSamplingError, OSError, ValueError) as exc:
        print(f"kdesampling {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
