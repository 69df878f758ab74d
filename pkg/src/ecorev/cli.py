"""Command-line front end: ``gen``, ``train``, ``run``, ``sweep`` and ``stats``.

Every command writes into a fresh run directory under ``--out`` and echoes its
resolved configuration into ``manifest.json``. Options may come from a JSON
config file (``--config``); explicit flags win.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime
from pathlib import Path

import numpy as np

from . import __version__
from .classifiers import ClassifierConfig, fit_chain
from .core import CostModel
from .data import (Dataset, DatasetError, SplitPlan, SyntheticSpec, default_data_dir,
                   generate_synthetic, load_ucr, make_splits, save_ucr)
from .metrics import summarize
from .serialization import ModelFileError, load_model, save_model
from .sweep import (CostGrid, DEFAULT_STRATEGIES, PAPER_COSTS, export_result,
                    fit_dataset, run_pipeline, SweepResult)
from .trigger import (Strategy, StrategyKind, batch_states, useful_revocation_stats,
                      write_traces)

log = logging.getLogger("ecorev")


class CLIError(Exception):
    pass


class UsageError(CLIError):
    pass


@dataclass
class RunConfig:
    data: list = field(default_factory=list)
    synthetic: int = 0
    synthetic_spec: dict = field(default_factory=dict)
    alphas: list | None = None
    betas: list | None = None
    alpha: float = 0.01
    beta: float = 0.05
    quick: bool = False
    strategies: list = field(default_factory=lambda: [s.value for s in DEFAULT_STRATEGIES])
    k_min: int = 1
    k_max: int = 5
    seed: int = 0
    out: str = "runs"
    run_name: str | None = None
    smoothing: float = 1.0
    learning_rate: float = 0.5
    n_iter: int = 500
    l2: float = 1e-2
    jobs: int | None = None
    strict: bool = False

    @property
    def classifier_config(self) -> ClassifierConfig:
        return ClassifierConfig(self.learning_rate, self.n_iter, self.l2)

    @property
    def k_values(self):
        return range(self.k_min, self.k_max + 1)

    @property
    def grid(self) -> CostGrid:
        if self.quick:
            base = CostGrid.quick()
        else:
            base = CostGrid()
        return CostGrid(tuple(self.alphas) if self.alphas else base.alphas,
                        tuple(self.betas) if self.betas else base.betas)


CONFIG_KEYS = {f.name for f in fields(RunConfig)}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        try:
            values.update(json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise CLIError(f"cannot read config {args.config}: {exc}") from None
        unknown = set(values) - CONFIG_KEYS
        if unknown:
            raise CLIError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key in CONFIG_KEYS:
        v = getattr(args, key, None)
        if v is not None and v != []:
            values[key] = v
    return RunConfig(**values)


def make_run_dir(cfg: RunConfig, command: str) -> Path:
    name = cfg.run_name or f"{command}-{datetime.now().strftime('%Y%m%d-%H%M%S-%f')}"
    path = Path(cfg.out) / name
    path.mkdir(parents=True, exist_ok=False)
    return path


def write_manifest(run_dir: Path, command: str, cfg: RunConfig, timings: dict, extra=None):
    manifest = {
        "command": command,
        "version": __version__,
        "seed": cfg.seed,
        "config": asdict(cfg),
        "timings_s": timings,
        **(extra or {}),
    }
    (run_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True,
                                                      default=str))


def _resolve_path(p: str) -> Path:
    path = Path(p)
    if not path.exists() and not path.is_absolute():
        candidate = default_data_dir() / path
        if candidate.exists():
            return candidate
    return path


def _load_datasets(cfg: RunConfig) -> list[Dataset]:
    datasets = [load_ucr(_resolve_path(p)) for p in cfg.data]
    for i in range(cfg.synthetic):
        spec = SyntheticSpec(**{**default_flip_spec(), **cfg.synthetic_spec,
                                "name": f"synthetic{i:02d}"})
        datasets.append(generate_synthetic(spec, seed=cfg.seed + i))
    return datasets


def default_flip_spec() -> dict:
    return dict(n_series=200, length=60, gap=2.0, gap_start=1.0, flip_at=0.4,
                flip_fraction=0.3)


# Commands -------------------------------------------------------------------

def cmd_gen(args) -> int:
    spec_kwargs = {k: getattr(args, k) for k in
                   ("n_series", "length", "gap", "gap_start", "onset", "ar_coef", "noise",
                    "flip_at", "flip_fraction", "class_balance") if getattr(args, k) is not None}
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        name = args.name if args.count == 1 else f"{args.name}{i:02d}"
        ds = generate_synthetic(SyntheticSpec(name=name, **spec_kwargs), seed=args.seed + i)
        path = save_ucr(ds, out / f"{name}.tsv", delimiter="\t")
        print(path)
    return 0


def cmd_train(args) -> int:
    cfg = resolve_config(args)
    if len(cfg.data) != 1:
        raise CLIError("train needs exactly one --data file")
    t0 = time.perf_counter()
    dataset = load_ucr(_resolve_path(cfg.data[0]))
    fitted = fit_dataset(dataset, cfg.seed, cfg.k_values, cfg.smoothing, cfg.classifier_config)
    run_dir = make_run_dir(cfg, "train")
    save_model(run_dir / "model.json", fitted.model, extra={
        "dataset": dataset.name,
        "class_names": list(dataset.class_names),
        "k_scores": {str(k): v for k, v in fitted.k_scores.items()},
    })
    (run_dir / "splits.json").write_text(json.dumps(fitted.plan.to_dict(), sort_keys=True))
    write_manifest(run_dir, "train", cfg, {"fit": time.perf_counter() - t0},
                   {"K": fitted.model.K, "checkpoints": list(fitted.model.checkpoints)})
    print(run_dir / "model.json")
    return 0


def _load_unlabeled(path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.strip():
                try:
                    rows.append([float(v) for v in line.replace(",", " ").split()])
                except ValueError as exc:
                    raise DatasetError(f"{path}:{lineno}: {exc}") from None
    if not rows or len({len(r) for r in rows}) != 1:
        raise DatasetError(f"{path}: empty or ragged input")
    return np.array(rows)


def cmd_run(args) -> int:
    cfg = resolve_config(args)
    if not args.model:
        raise CLIError("run needs --model")
    if len(cfg.data) != 1:
        raise CLIError("run needs exactly one --data file")
    model, _ = load_model(args.model)
    strategies = [StrategyKind(s) for s in cfg.strategies]
    if args.no_labels:
        X, y = _load_unlabeled(_resolve_path(cfg.data[0])), None
        if StrategyKind.ORACLE in strategies:
            raise CLIError("the oracle strategy needs labelled input")
    else:
        ds = load_ucr(_resolve_path(cfg.data[0]))
        if args.split != "all":
            plan_path = Path(args.model).with_name("splits.json")
            if not plan_path.exists():
                raise CLIError(f"--split {args.split} needs {plan_path}")
            plan = SplitPlan.from_dict(json.loads(plan_path.read_text()))
            ds = ds.subset(getattr(plan, args.split))
        X, y = ds.X, ds.y
    if X.shape[1] != model.T:
        raise CLIError(f"input series have length {X.shape[1]}, model expects {model.T}")
    cost = CostModel(alpha=cfg.alpha, beta=cfg.beta)
    t0 = time.perf_counter()
    states = batch_states(model, X)
    run_dir = make_run_dir(cfg, "run")
    entries, summaries = [], []
    for kind in strategies:
        strat = Strategy(kind, model, cost)
        traces = [strat.run(x, truth=None if y is None else int(y[i]), state=st)
                  for i, (x, st) in enumerate(zip(X, states))]
        entries += [(kind.value, i, tr) for i, tr in enumerate(traces)]
        decisions = [(kind.value, i, " ".join(f"{t}:{c}" for t, c in tr.sequence))
                     for i, tr in enumerate(traces)]
        with open(run_dir / f"decisions_{kind.value}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("strategy", "series", "decisions"))
            w.writerows(decisions)
        if y is not None:
            s = summarize(traces, y, cost, model.T)
            summaries.append((kind.value, cfg.alpha, cfg.beta, s.avg_cost, s.earliness,
                              s.kappa, s.n_revocations_mean))
    write_traces(run_dir / "traces.csv", entries)
    if summaries:
        with open(run_dir / "summary.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("strategy", "alpha", "beta", "avg_cost", "earliness", "kappa",
                        "n_revocations_mean"))
            w.writerows([[repr(v) if isinstance(v, float) else v for v in row]
                         for row in summaries])
    write_manifest(run_dir, "run", cfg, {"replay": time.perf_counter() - t0},
                   {"model": str(args.model)})
    print(run_dir)
    return 0


def cmd_sweep(args) -> int:
    cfg = resolve_config(args)
    if not cfg.data and not cfg.synthetic:
        raise UsageError("sweep needs at least one dataset (--data or --synthetic N)")
    t0 = time.perf_counter()
    datasets = _load_datasets(cfg)
    jobs = cfg.jobs or os.cpu_count() or 1
    results = []
    for ds in datasets:
        try:
            results.append(run_pipeline(ds, cfg.grid, cfg.strategies, cfg.seed, cfg.k_values,
                                        cfg.smoothing, cfg.classifier_config, n_jobs=jobs))
        except Exception as exc:
            if cfg.strict:
                raise
            log.error("dataset %s failed: %s", ds.name, exc)
            failed = SweepResult(cfg.grid, tuple(StrategyKind(s) for s in cfg.strategies))
            for a, b in cfg.grid.cells():
                for s in failed.strategies:
                    failed.failures[(ds.name, a, b, s)] = f"{type(exc).__name__}: {exc}"
            results.append(failed)
    result = SweepResult.merge(results)
    t1 = time.perf_counter()
    run_dir = make_run_dir(cfg, "sweep")
    export_result(result, run_dir)
    write_manifest(run_dir, "sweep", cfg, {"fit_and_replay": t1 - t0,
                                           "export": time.perf_counter() - t1,
                                           "per_dataset": result.timings},
                   {"datasets": result.datasets,
                    "failures": [list(map(str, k)) + [v] for k, v in result.failures.items()]})
    print(run_dir)
    if cfg.strict and result.failures:
        return 1
    return 0


def cmd_stats(args) -> int:
    cfg = resolve_config(args)
    if not args.model or len(cfg.data) != 1:
        raise CLIError("stats needs --model and one --data file")
    model, _ = load_model(args.model)
    ds = load_ucr(_resolve_path(cfg.data[0]))
    if args.split != "all":
        plan = SplitPlan.from_dict(json.loads(Path(args.model).with_name("splits.json").read_text()))
        ds = ds.subset(getattr(plan, args.split))
    alphas = cfg.alphas or [0.0025, 0.025, 0.5]
    states = batch_states(model, ds.X)
    run_dir = make_run_dir(cfg, "stats")
    with open(run_dir / "useful_revocations.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("alpha", "fraction"))
        for a in alphas:
            frac = useful_revocation_stats(model, CostModel(alpha=a), ds.X, ds.y, states=states)
            w.writerow((repr(float(a)), repr(frac)))
            print(f"alpha={a}: {100 * frac:.1f}% of first decisions could be usefully revoked")
    write_manifest(run_dir, "stats", cfg, {})
    return 0


# Parser ---------------------------------------------------------------------

def _common(p, data=True):
    p.add_argument("--config", help="JSON config file; flags override its values")
    if data:
        p.add_argument("--data", action="append", default=[],
                       help="UCR-style data file (repeatable); relative paths also "
                            "resolve against $ECOREV_DATA_DIR")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="parent directory for run directories (default: runs)")
    p.add_argument("--run-name", dest="run_name",
                   help="run directory name (default: timestamped)")


def _fit_opts(p):
    p.add_argument("--k-min", dest="k_min", type=int)
    p.add_argument("--k-max", dest="k_max", type=int)
    p.add_argument("--smoothing", type=float)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--n-iter", dest="n_iter", type=int)
    p.add_argument("--l2", type=float)


def _floats(s: str) -> list:
    return [float(v) for v in s.split(",") if v]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ecorev", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate synthetic datasets")
    p.add_argument("--out", default=str(default_data_dir()))
    p.add_argument("--name", default="synthetic")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    for opt, typ in (("n-series", int), ("length", int), ("gap", float),
                     ("gap-start", float), ("onset", float), ("ar-coef", float),
                     ("noise", float), ("flip-at", float), ("flip-fraction", float),
                     ("class-balance", float)):
        p.add_argument(f"--{opt}", dest=opt.replace("-", "_"), type=typ)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="fit the classifier chain and gamma model")
    _common(p)
    _fit_opts(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("run", help="replay strategies at one (alpha, beta)")
    _common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--strategy", dest="strategies", action="append", default=[],
                   choices=[s.value for s in StrategyKind])
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float, help="change-of-decision cost (default 0.05)")
    p.add_argument("--split", choices=("all", "test", "train"), default="all")
    p.add_argument("--no-labels", action="store_true",
                   help="input rows carry no label column")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="full (alpha, beta) protocol over datasets")
    _common(p)
    _fit_opts(p)
    p.add_argument("--synthetic", type=int, help="add N seeded synthetic flip datasets")
    p.add_argument("--alphas", type=_floats)
    p.add_argument("--betas", type=_floats)
    p.add_argument("--quick", action="store_true", default=None, help="3x3 smoke-test grid")
    p.add_argument("--strategy", dest="strategies", action="append", default=[],
                   choices=[s.value for s in StrategyKind])
    p.add_argument("--jobs", type=int, help="parallel workers (default: all cores)")
    p.add_argument("--strict", action="store_true", default=None,
                   help="exit non-zero if any cell failed")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("stats", help="useful-revocation report")
    _common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--alphas", type=_floats)
    p.add_argument("--split", choices=("all", "test", "train"), default="all")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"ecorev {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (CLIError, DatasetError, ModelFileError, ValueError, OSError) as exc:
        print(f"ecorev {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
