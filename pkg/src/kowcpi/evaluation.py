"""Coverage metrics, split-conformal and ACI baselines, and the multi-seed benchmark."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .config import RunConfig
from .datagen import generate, seasonal_beta
from .embedding import ResidualHistory
from .io import DataError, fmt, ingest_csv, write_rows
from .kernels import KernelSpec
from .pipeline import KOWCPI, IntervalResult, resolve_bandwidths, run_stream
from .predictor import fit as fit_predictor, lag_matrix
from .window import cv_window

TABLE_HEADER = ("method", "coverage_mean", "coverage_std", "width_mean", "width_std", "n_seeds")


@dataclass
class EvaluationReport:
    method: str
    per_step: list[IntervalResult]
    m: int = 100
    marginal_coverage: float = field(init=False)
    mean_width: float = field(init=False)
    rolling: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        cov = self.covered
        self.marginal_coverage = float(cov.mean()) if cov.size else float("nan")
        self.mean_width = float(self.widths.mean()) if cov.size else float("nan")
        self.rolling = rolling_coverage(cov, self.m)

    @property
    def covered(self) -> np.ndarray:
        return np.array([bool(r.covered) for r in self.per_step], dtype=bool)

    @property
    def widths(self) -> np.ndarray:
        return np.array([r.width for r in self.per_step], dtype=float)


def rolling_coverage(covered, m: int) -> np.ndarray:
    """RC_t = mean of the last m coverage indicators, for t = m, ..., len(covered)."""
    if m < 1:
        raise ValueError(f"rolling window m must be >= 1, got {m}")
    c = np.asarray(covered, dtype=float)
    if m > c.size:
        return np.empty(0)
    s = np.concatenate([[0.0], np.cumsum(c)])
    return (s[m:] - s[:-m]) / m


def conformal_rank_quantile(scores, level: float) -> float:
    """ceil(level * (n + 1))-th smallest score; +inf when the rank exceeds n."""
    s = np.sort(np.asarray(scores, dtype=float))
    n = s.size
    k = max(1, math.ceil(level * (n + 1) - 1e-9))
    return float(s[k - 1]) if k <= n else math.inf


def _baseline_result(t, yhat, q, y, alpha) -> IntervalResult:
    r = IntervalResult(t, yhat - q, yhat + q, alpha / 2, float("nan"), False, yhat, 0, float("nan"))
    r.y = float(y)
    r.covered = bool(r.lower <= y <= r.upper)
    return r


def scp_baseline(calibration, alpha: float, yhat, y, *, t0: int = 0, m: int = 100) -> EvaluationReport:
    """Fixed symmetric interval yhat +/- q with q the conformal rank quantile of |residuals|."""
    q = conformal_rank_quantile(np.abs(calibration), 1 - alpha)
    steps = [_baseline_result(t0 + i, float(f), q, obs, alpha) for i, (f, obs) in enumerate(zip(yhat, y))]
    return EvaluationReport("scp", steps, m)


class ACI:
    """alpha_{t+1} = alpha_t + gamma (alpha - err_t), clamped to [0.001, 0.999]."""

    LOW, HIGH = 0.001, 0.999

    def __init__(self, alpha: float, gamma: float):
        self.alpha = alpha
        self.gamma = gamma
        self.alpha_t = alpha

    def update(self, covered: bool) -> float:
        err = 0.0 if covered else 1.0
        self.alpha_t = min(self.HIGH, max(self.LOW, self.alpha_t + self.gamma * (self.alpha - err)))
        return self.alpha_t


def aci_baseline(calibration, alpha: float, gamma: float, yhat, y, *, t0: int = 0, m: int = 100) -> EvaluationReport:
    """Symmetric interval from a sliding buffer of |residuals| at the adaptive level 1 - alpha_t."""
    buf = ResidualHistory(len(calibration), np.abs(calibration))
    tracker = ACI(alpha, gamma)
    steps = []
    for i, (f, obs) in enumerate(zip(yhat, y)):
        q = conformal_rank_quantile(buf.values, 1 - tracker.alpha_t)
        r = _baseline_result(t0 + i, float(f), q, obs, tracker.alpha_t)
        steps.append(r)
        tracker.update(r.covered)
        buf.push(abs(obs - f))
    return EvaluationReport("aci", steps, m)


@dataclass
class PreparedRun:
    """Everything one seed needs after the predictor is fit: residuals per split and test predictions."""

    seed: int
    train_residuals: np.ndarray
    tune_residuals: np.ndarray
    test_yhat: np.ndarray
    test_y: np.ndarray
    test_t0: int
    manifest: dict


def load_series(cfg: RunConfig, seed: int) -> tuple[np.ndarray, dict]:
    if cfg.data.source == "csv":
        return ingest_csv(cfg.data.csv), {"source": "csv", "path": cfg.data.csv}
    spec = cfg.generator_spec(seed)
    info = {"source": "generator", "kind": spec.kind, "seed": seed}
    if spec.kind == "nonstationary-seasonal":
        info["beta"] = [float(b) for b in seasonal_beta(seed)]
    return generate(spec), info


def split_sizes(m: int, split: Sequence[float]) -> tuple[int, int, int]:
    tot = sum(split)
    n_train = int(math.floor(m * split[0] / tot))
    n_tune = int(math.floor(m * split[1] / tot))
    return n_train, n_tune, m - n_train - n_tune


def prepare(cfg: RunConfig, seed: int, series=None) -> PreparedRun:
    """Fit the point predictor on the first split and compute residuals for the rest.

    Training residuals are out-of-bag for the forest (in-sample otherwise);
    the tuning and test splits are scored out of sample.
    """
    info = {}
    if series is None:
        series, info = load_series(cfg, seed)
    d = cfg.lag_count()
    X, target = lag_matrix(series, d)
    n_train, n_tune, n_test = split_sizes(target.size, cfg.split)
    if n_test < 1 or n_tune < 1:
        raise DataError(f"series too short: splits {n_train}/{n_tune}/{n_test}")
    try:
        model = fit_predictor(cfg.predictor_spec(), series[: n_train + d], seed=seed)
    except ValueError as exc:
        # the spec was validated with the config, so what is left is a data problem
        raise DataError(str(exc)) from None
    train_res = model.training_residuals(X[:n_train], target[:n_train])
    tune = slice(n_train, n_train + n_tune)
    test = slice(n_train + n_tune, None)
    tune_res = target[tune] - model.predict_many(X[tune])
    info.update(d=d, n_train=n_train, n_tune=n_tune, n_test=n_test)
    return PreparedRun(
        seed=seed,
        train_residuals=train_res,
        tune_residuals=tune_res,
        test_yhat=model.predict_many(X[test]),
        test_y=target[test],
        test_t0=d + n_train + n_tune + 1,
        manifest=info,
    )


def _kernels(cfg: RunConfig, residuals, windows) -> tuple[dict[int, KernelSpec], dict]:
    if cfg.kernel.bandwidth is not None:
        ks = {w: KernelSpec(cfg.kernel.family, cfg.kernel.bandwidth) for w in windows}
        return ks, {w: {"bandwidth": cfg.kernel.bandwidth, "fallback": False} for w in windows}
    sel = resolve_bandwidths(
        residuals, windows, cfg.kernel.family, cfg.kernel.grid or None, cfg.kernel.grid_size, cfg.kernel.grid_span
    )
    trace = {
        w: {"bandwidth": s.bandwidth, "fallback": s.fallback, "grid": list(s.grid), "aic": list(s.aic)}
        for w, s in sel.items()
    }
    return {w: s.kernel for w, s in sel.items()}, trace


def tune(cfg: RunConfig, prep: PreparedRun) -> dict:
    """Resolve the window length (cv mode) and bandwidths from the training and tuning splits."""
    pre = prep.train_residuals
    full = np.concatenate([pre, prep.tune_residuals])
    T = cfg.history or full.size
    policy = cfg.window_policy()
    out: dict = {"mode": policy.mode}
    if policy.mode == "cv":
        T_cv = min(T, pre.size)
        cands = policy.resolved_candidates(T_cv)
        policy.validate(T_cv)
        kernels, _ = _kernels(cfg, pre[-T_cv:], cands)
        tune_yhat = np.zeros(prep.tune_residuals.size)

        def evaluate(w):
            mach = KOWCPI(ResidualHistory(T_cv, pre[-T_cv:]), cfg.alpha, w, kernels[w], beta_step=cfg.beta_step)
            rep = EvaluationReport("kowcpi", run_stream(mach, tune_yhat, prep.tune_residuals))
            return rep.marginal_coverage, rep.mean_width

        w, table = cv_window(cands, cfg.alpha, evaluate)
        out["cv_table"] = table
        windows = (w,)
    else:
        policy.validate(min(T, full.size))
        windows = policy.resolved_candidates(T)
        w = policy.w if policy.mode == "fixed" else None
    if T > full.size:
        raise ValueError(f"history T={T} exceeds the {full.size} residuals available before the test split")
    start = full[-T:]
    kernels, trace = _kernels(cfg, start, windows)
    out.update(w=w, kernels=kernels, bandwidth=trace, history=start)
    return out


def run_methods(cfg: RunConfig, prep: PreparedRun, tuned: dict | None = None) -> dict[str, EvaluationReport]:
    tuned = tuned or tune(cfg, prep)
    m = cfg.rolling_m
    start = tuned["history"]
    T = start.size
    reports = {}
    for method in cfg.methods:
        if method in ("kowcpi", "plain-nw"):
            window = tuned["w"] if tuned["w"] is not None else cfg.window_policy()
            mach = KOWCPI(
                ResidualHistory(T, start),
                cfg.alpha,
                window,
                tuned["kernels"],
                beta_step=cfg.beta_step,
                plain=method == "plain-nw",
                reselect_every=cfg.kernel.reselect_every,
                bandwidth_grid=cfg.kernel.grid or None,
                t0=prep.test_t0,
            )
            reports[method] = EvaluationReport(method, run_stream(mach, prep.test_yhat, prep.test_y), m)
        elif method == "scp":
            reports[method] = scp_baseline(start, cfg.alpha, prep.test_yhat, prep.test_y, t0=prep.test_t0, m=m)
        elif method == "aci":
            reports[method] = aci_baseline(
                start, cfg.alpha, cfg.aci_gamma, prep.test_yhat, prep.test_y, t0=prep.test_t0, m=m
            )
    return reports


def aggregate(per_seed: list[dict[str, EvaluationReport]], methods: Sequence[str]) -> list[dict]:
    """Mean and population standard deviation across seeds, one row per method."""
    rows = []
    for method in methods:
        cov = np.array([r[method].marginal_coverage for r in per_seed])
        wid = np.array([r[method].mean_width for r in per_seed])
        rows.append(
            {
                "method": method,
                "coverage_mean": float(cov.mean()),
                "coverage_std": float(cov.std()),
                "width_mean": float(wid.mean()),
                "width_std": float(wid.std()),
                "n_seeds": len(per_seed),
            }
        )
    return rows


@dataclass
class BenchmarkResult:
    table: list[dict]
    per_seed: list[dict[str, EvaluationReport]]
    manifest: dict


def run_benchmark(cfg: RunConfig, seeds: Sequence[int] | None = None) -> BenchmarkResult:
    seeds = list(cfg.seeds if seeds is None else seeds)
    per_seed, seed_info = [], []
    for seed in seeds:
        prep = prepare(cfg, seed)
        tuned = tune(cfg, prep)
        per_seed.append(run_methods(cfg, prep, tuned))
        seed_info.append(
            {
                "seed": seed,
                **prep.manifest,
                "w": tuned["w"],
                "bandwidth": {str(w): v for w, v in tuned["bandwidth"].items()},
                "cv_table": tuned.get("cv_table"),
            }
        )
    manifest = make_manifest(cfg, seeds, seed_info)
    return BenchmarkResult(aggregate(per_seed, cfg.methods), per_seed, manifest)


def make_manifest(cfg: RunConfig, seeds, runs) -> dict:
    conf = cfg.to_dict()
    conf["seeds"] = list(seeds)
    return {
        "manifest_version": 1,
        "library_version": __version__,
        "config": conf,
        "metadata": {"rolling_m": cfg.rolling_m, "aci_gamma": cfg.aci_gamma},
        "runs": runs,
    }


def write_table(result: BenchmarkResult, outdir) -> None:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_rows(outdir / "results.csv", TABLE_HEADER, ([row[k] for k in TABLE_HEADER] for row in result.table))
    per_seed_rows = []
    for seed, reports in zip(result.manifest["config"]["seeds"], result.per_seed):
        for method, rep in reports.items():
            per_seed_rows.append([seed, method, rep.marginal_coverage, rep.mean_width])
    write_rows(outdir / "per_seed.csv", ("seed", "method", "coverage", "width"), per_seed_rows)
    payload = {"table": result.table, "metadata": result.manifest["metadata"]}
    (outdir / "results.json").write_text(json.dumps(payload, indent=2, sort_keys=True, default=fmt) + "\n")
