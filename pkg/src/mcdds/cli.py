"""Command-line entry point.

    mcdds pipeline      [--config PATH] [--out DIR] [--seed N] [--set key=value ...]
    mcdds figure NAME   (fig5 | fig6 | fig7 | fig8 | fig_circ)
    mcdds fit --data CSV [--dose MG]
    mcdds receiver-demo
    mcdds idrm-demo

Exit codes: 0 ok, 2 config error, 3 numeric failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, PipelineConfig, apply_overrides, parse_config
from .ecm import steady_state
from .estimation import PlasmaSample, fit_g1
from .idrm import EndogenousPulseTrain, IdrmState, simulate
from .pipeline import (
    FIGURES,
    NumericError,
    receiver_columns,
    reproduce_figure,
    run_pipeline,
    rx_grid,
)
from .quantities import PER_UM3, TimeSeries, write_columns

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def load_config(args) -> PipelineConfig:
    raw = {}
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError([f"cannot read config {args.config}: {exc}"]) from None
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"malformed JSON in {args.config}: {exc}"]) from None
    overrides = list(args.set or [])
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    if args.out is not None:
        overrides.append(f"output_dir={json.dumps(args.out)}")
    cfg = parse_config(apply_overrides(raw, overrides))
    for w in cfg.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return cfg


def cmd_pipeline(args):
    cfg = load_config(args)
    out = run_pipeline(cfg, cfg.output_dir)
    print(f"wrote {len(out.manifest['files'])} CSV files and manifest.json to {cfg.output_dir}")


def cmd_figure(args):
    cfg = load_config(args)
    curves = reproduce_figure(args.name, cfg, cfg.output_dir)
    for key in curves:
        print(f"{cfg.output_dir}/{key}.csv")


def read_plasma_csv(path) -> list[PlasmaSample]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"t_hours", "value"} <= set(reader.fieldnames):
            raise ConfigError([f"{path}: expected columns t_hours,value"])
        try:
            return [PlasmaSample(float(r["t_hours"]), float(r["value"])) for r in reader]
        except ValueError as exc:
            raise NumericError(f"{path}: {exc}") from None


def cmd_fit(args):
    cfg = load_config(args)
    data = read_plasma_csv(args.data)
    try:
        result = fit_g1(data, args.dose, cfg.g1)
    except ValueError as exc:
        raise ConfigError([str(exc)]) from None
    text = json.dumps(result.to_json_dict(), indent=2)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "fit.json").write_text(text + "\n")
    print(text)


def _steady_ambient(cfg: PipelineConfig) -> TimeSeries:
    """Constant ECM steady state at the first distance, over the receiver window."""
    # total DAC past the BBB for the configured regimen: sum(dose weight) * k * a
    w = sum(d.dose for d in cfg.regimen.doses) / 125.0
    Q = w * cfg.g1.k * cfg.g2.a * cfg.mg_to_molecules
    c = steady_state(cfg.ecm, Q, cfg.distances_mm[0] * 1000.0)
    grid = rx_grid(cfg)
    return TimeSeries(grid, np.full(grid.n, c), PER_UM3, "ambient")


def _demo_run(cfg):
    ambient = _steady_ambient(cfg)
    grid = ambient.grid
    pulses = EndogenousPulseTrain.periodic(
        grid.t_start, grid.t_end, cfg.pulses.period_s, cfg.pulses.amplitude
    )
    return simulate(cfg.idrm, ambient, pulses, cfg.seed, IdrmState.charged(cfg.initial_storage))


def cmd_receiver_demo(args):
    cfg = load_config(args)
    run = _demo_run(cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_columns(out / "receiver_demo.csv", receiver_columns(run))
    print(f"{out}/receiver_demo.csv  mean lambda={np.mean(run.intensity.values):.6g}")


def cmd_idrm_demo(args):
    cfg = load_config(args)
    run = _demo_run(cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_columns(out / "idrm_demo.csv", run.columns())
    a, r, o = run.tallies
    print(f"{out}/idrm_demo.csv  absorbed={a} released={r} overflow={o}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config or run manifest")
    common.add_argument("--out", help="output directory (overrides output_dir)")
    common.add_argument("--seed", type=int, help="unsigned 64-bit seed")
    common.add_argument(
        "--set", action="append", metavar="KEY=VALUE", help="dotted-path override, repeatable"
    )
    parser = argparse.ArgumentParser(prog="mcdds", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("pipeline", parents=[common], help="run the full chain").set_defaults(
        func=cmd_pipeline
    )
    fig = sub.add_parser("figure", parents=[common], help="emit one figure family as CSV")
    fig.add_argument("name", choices=FIGURES)
    fig.set_defaults(func=cmd_figure)
    fit = sub.add_parser("fit", parents=[common], help="fit G1 to a t_hours,value CSV")
    fit.add_argument("--data", required=True)
    fit.add_argument("--dose", type=float, default=125.0)
    fit.set_defaults(func=cmd_fit)
    sub.add_parser("receiver-demo", parents=[common]).set_defaults(func=cmd_receiver_demo)
    sub.add_parser("idrm-demo", parents=[common]).set_defaults(func=cmd_idrm_demo)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
