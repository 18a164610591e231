"""Command-line front end: ``kowcpi {predict,bench,generate,tune}``.

Every subcommand writes ``manifest.json`` next to its outputs. Feeding that
manifest back through ``--config`` replays the run exactly.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config, parse_override
from .datagen import generate, seasonal_beta
from .evaluation import make_manifest, prepare, run_benchmark, tune, write_table
from .embedding import ResidualHistory
from .io import DataError, fmt, ingest_csv, write_rows, write_series, write_trace
from .pipeline import KOWCPI, run_stream

__all__ = ["main", "ingest_csv"]

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 2, 3


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML/JSON config or a previous manifest.json")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="dotted override, repeatable")
    common.add_argument("--out", help="output directory (overrides 'output')")
    common.add_argument("--alpha", type=float)
    common.add_argument("--seeds", type=int, nargs="+")
    common.add_argument("--csv", help="read the series from a CSV with column y (and optional t)")

    p = argparse.ArgumentParser(prog="kowcpi", description="Sequential conformal intervals for time series.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("predict", parents=[common], help="per-step intervals on one series")
    sub.add_parser("bench", parents=[common], help="benchmark table over seeds and methods")
    gen = sub.add_parser("generate", parents=[common], help="write a synthetic series as t,y")
    gen.add_argument("--kind", help="generator kind")
    gen.add_argument("--length", type=int)
    sub.add_parser("tune", parents=[common], help="report the AIC curve and the selected window")
    return p


def _overrides(args) -> dict:
    ov = dict(parse_override(item) for item in args.set)
    if args.alpha is not None:
        ov["alpha"] = args.alpha
    if args.seeds:
        ov["seeds"] = list(args.seeds)
    if args.out:
        ov["output"] = args.out
    if args.csv:
        ov["data.source"] = "csv"
        ov["data.csv"] = args.csv
    if getattr(args, "kind", None):
        ov["data.kind"] = args.kind
    if getattr(args, "length", None):
        ov["data.length"] = args.length
    return ov


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=fmt) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [float(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def cmd_generate(cfg: RunConfig, out: Path) -> dict:
    if cfg.data.source != "generator":
        raise ConfigError("data.source", "generate needs a generator source")
    runs = []
    for seed in cfg.seeds:
        spec = cfg.generator_spec(seed)
        name = "series.csv" if len(cfg.seeds) == 1 else f"series_seed{seed}.csv"
        write_series(out / name, generate(spec))
        info = {"seed": seed, "file": name}
        if spec.kind == "nonstationary-seasonal":
            info["beta"] = [float(b) for b in seasonal_beta(seed)]
        runs.append(info)
    return make_manifest(cfg, cfg.seeds, runs)


def cmd_predict(cfg: RunConfig, out: Path) -> dict:
    seed = cfg.seeds[0]
    prep = prepare(cfg, seed)
    tuned = tune(cfg, prep)
    start = tuned["history"]
    window = tuned["w"] if tuned["w"] is not None else cfg.window_policy()
    mach = KOWCPI(
        ResidualHistory(start.size, start),
        cfg.alpha,
        window,
        tuned["kernels"],
        beta_step=cfg.beta_step,
        reselect_every=cfg.kernel.reselect_every,
        bandwidth_grid=cfg.kernel.grid or None,
        t0=prep.test_t0,
    )
    results = run_stream(mach, prep.test_yhat, prep.test_y)
    write_trace(out / "intervals.csv", results)
    run = {
        "seed": seed,
        **prep.manifest,
        "w": tuned["w"],
        "bandwidth": {str(w): v for w, v in tuned["bandwidth"].items()},
    }
    return make_manifest(cfg, [seed], [run])


def cmd_bench(cfg: RunConfig, out: Path) -> dict:
    result = run_benchmark(cfg)
    write_table(result, out)
    return result.manifest


def cmd_tune(cfg: RunConfig, out: Path) -> dict:
    runs, curve_rows, cv_rows = [], [], []
    for seed in cfg.seeds:
        prep = prepare(cfg, seed)
        tuned = tune(cfg, prep)
        for w, info in tuned["bandwidth"].items():
            for h, a in zip(info.get("grid", [info["bandwidth"]]), info.get("aic", [None])):
                curve_rows.append((seed, w, h, a, h == info["bandwidth"]))
        for row in tuned.get("cv_table") or []:
            cv_rows.append((seed, row["w"], row["coverage"], row["width"]))
        run = {"seed": seed, **prep.manifest, "w": tuned["w"], "bandwidth": {str(w): v for w, v in tuned["bandwidth"].items()}}
        if tuned.get("cv_table") is not None:
            run["cv_table"] = tuned["cv_table"]
        runs.append(run)
        print(f"seed {seed}: w={tuned['w']} " + " ".join(f"h[{w}]={fmt(v['bandwidth'])}" for w, v in tuned["bandwidth"].items()))
    write_rows(out / "aic_curve.csv", ("seed", "w", "h", "aic", "selected"), curve_rows)
    if cv_rows:
        write_rows(out / "cv_table.csv", ("seed", "w", "coverage", "width"), cv_rows)
    return make_manifest(cfg, cfg.seeds, runs)


COMMANDS = {"generate": cmd_generate, "predict": cmd_predict, "bench": cmd_bench, "tune": cmd_tune}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config, _overrides(args))
        out = Path(cfg.output)
        out.mkdir(parents=True, exist_ok=True)
        manifest = COMMANDS[args.command](cfg, out)
        manifest["command"] = args.command
        _write_json(out / "manifest.json", _jsonable(manifest))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
