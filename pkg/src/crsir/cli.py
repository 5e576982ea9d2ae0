"""Command line entry point: ``crsir <subcommand>``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .clustering import complete_linkage, cut_merges, dissimilarity_matrix
from .errors import CrsirError
from .harness.config import PanelConfig, load_config
from .harness.data import load_panel
from .harness.evaluation import rolling_oos
from .harness.simulation import rmse_table
from .model import crsir_fit, load_model, save_model
from .numerics import correlation

log = logging.getLogger("crsir")

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text):
    return tuple(float(v) for v in text.split(","))


def _ints(text):
    return tuple(int(v) for v in text.split(","))


def _config(args):
    overrides = dict(
        data_path=getattr(args, "data", None),
        horizons=getattr(args, "horizons", None),
        window_length=getattr(args, "window", None),
        cv_c=getattr(args, "c_grid", None),
        cv_tau=getattr(args, "tau_grid", None),
        H=getattr(args, "slices", None),
        alpha=getattr(args, "alpha", None),
        seed=getattr(args, "seed", None),
        eval_start=getattr(args, "eval_start", None),
        cv_refresh=getattr(args, "cv_refresh", None),
    )
    targets = getattr(args, "targets", None)
    if targets:
        overrides["forecast_targets"] = tuple(targets.split(","))
    if getattr(args, "config", None):
        return load_config(args.config, **overrides)
    return PanelConfig().with_overrides(**overrides)


def cmd_simulate(args):
    res = rmse_table(T=args.T, runs=args.runs, seed=args.seed, c=args.c, tau=args.tau, H=args.slices)
    text = res.to_markdown()
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")


def _pairs(panel, target, h):
    names = [n for n in panel.data.column_names if n != target]
    X = panel.data.select(names).values
    y = panel.data.column(target)
    return names, X[: len(y) - h], y[h:]


def cmd_fit(args):
    config = _config(args)
    panel = load_panel(config)
    names, X, y = _pairs(panel, args.target, args.h)
    model = crsir_fit(X, y, args.c, args.tau, config.H, config.alpha)
    model = replace(model, feature_names=tuple(names))
    save_model(model, args.out)
    print(f"fitted c={model.c} tau={model.tau} m={model.m} v={model.v} -> {args.out}")


def cmd_forecast(args):
    model = load_model(args.model)
    config = _config(args)
    panel = load_panel(config)
    names = model.feature_names or panel.data.column_names
    X = panel.data.select(list(names)).values
    pred = model.predict(X)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["row", "prediction"])
        for r, p in zip(panel.rows, pred):
            w.writerow([int(r), repr(float(p))])
    finally:
        if args.out:
            out.close()


def cmd_evaluate(args):
    config = _config(args)
    panel = load_panel(config)
    report = rolling_oos(
        panel.data, config, progress=lambda s, h: log.info("evaluating %s h=%d", s, h)
    )
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report.to_csv(out / "report.csv")
    report.forecasts_csv(out / "forecasts.csv")
    (out / "summary.md").write_text(report.to_markdown())
    print(report.to_markdown())


def cmd_cluster_report(args):
    config = _config(args)
    panel = load_panel(config)
    names = panel.data.column_names
    D = dissimilarity_matrix(correlation(panel.data.values))
    _, merges = complete_linkage(D, 1)
    assignment = cut_merges(merges, len(names), args.c)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["step", "left", "right", "height"])
        for m in merges:
            w.writerow([m.step, m.left, m.right, repr(m.height)])
        out.write(f"# partition into {args.c} clusters (cluster,position,members)\n")
        for pos, k in enumerate(assignment.order):
            members = " ".join(names[i] for i in assignment.members(k))
            out.write(f"# {k},{pos},{members}\n")
    finally:
        if args.out:
            out.close()


def build_parser():
    p = _Parser(prog="crsir", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def data_opts(sp):
        sp.add_argument("--config", help="YAML file with PanelConfig fields")
        sp.add_argument("--data", help="comma-separated panel file (overrides config)")

    s = sub.add_parser("simulate", help="equicorrelated design: CRSIR vs SIR RMSE table")
    s.add_argument("--T", type=int, default=300)
    s.add_argument("--runs", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--c", type=int, default=10)
    s.add_argument("--tau", type=float, default=0.5)
    s.add_argument("--slices", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("fit", help="fit CRSIR of y_{t+h} on the other series at t")
    data_opts(s)
    s.add_argument("--target", required=True)
    s.add_argument("--h", type=int, default=1)
    s.add_argument("--c", type=int, required=True)
    s.add_argument("--tau", type=float, required=True)
    s.add_argument("--slices", type=int)
    s.add_argument("--alpha", type=float)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("forecast", help="apply a saved model to every panel row")
    data_opts(s)
    s.add_argument("--model", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_forecast)

    s = sub.add_parser("evaluate", help="rolling pseudo out-of-sample study")
    data_opts(s)
    s.add_argument("--targets", help="comma-separated target series")
    s.add_argument("--horizons", type=_ints)
    s.add_argument("--window", type=int)
    s.add_argument("--c-grid", type=_ints)
    s.add_argument("--tau-grid", type=_floats)
    s.add_argument("--slices", type=int)
    s.add_argument("--alpha", type=float)
    s.add_argument("--eval-start", type=int)
    s.add_argument("--cv-refresh", type=int)
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("cluster-report", help="merge history and partition of the predictors")
    data_opts(s)
    s.add_argument("--c", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_cluster_report)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        args.func(args)
    except CrsirError as exc:
        print(f"crsir: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"crsir: {exc}", file=sys.stderr)
        return EXIT_DATA
    except np.linalg.LinAlgError as exc:
        print(f"crsir: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
