"""Acceptance suite: one PASS/FAIL line per criterion, at the stated tolerances.

Run with ``pytest tests/test_acceptance.py -v`` (the report lines are
printed even when output capture is on) or directly as a script.
The synthetic reproductions (criteria 8 to 10) take a few minutes.
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest
from scipy.special import kolmogorov

from kowcpi.bandwidth import SmootherMatrix, aic_c, build_smoother
from kowcpi.cli import main as cli_main
from kowcpi.config import load_config
from kowcpi.embedding import ResidualHistory, segment_array
from kowcpi.evaluation import run_benchmark
from kowcpi.kernels import FAMILIES, KernelSpec
from kowcpi.pipeline import KOWCPI, beta_grid, beta_star_search
from kowcpi.rnw import RnwFit, fit_rnw, rnw_weights, solve_lambda
from kowcpi.window import ks_pvalue, ks_statistic

SEEDS = [0, 1, 2, 3, 4]
SYNTHETIC = {
    "data.length": 2000,
    "split": [0.7, 0.1, 0.2],
    "alpha": 0.1,
    "beta_step": 0.005,
    "predictor.kind": "random-forest",
    "predictor.trees": 10,
    "window": {"mode": "cv", "candidates": [1, 2, 3, 5, 10]},
    "methods": ["kowcpi", "scp", "aci"],
    "seeds": SEEDS,
}
ADAPTIVE_CANDIDATES = [5, 10, 15, 20]


def report(capsys, n: int, ok: bool, detail: str) -> None:
    line = f"[criterion {n:2d}] {'PASS' if ok else 'FAIL'}  {detail}"
    with capsys.disabled():
        print("\n" + line)


def random_segments(rng):
    n = int(rng.integers(3, 201))
    w = int(rng.integers(1, 11))
    family = FAMILIES[int(rng.integers(len(FAMILIES)))]
    # distances between w-dimensional segments grow like sqrt(w)
    h = float(np.exp(rng.uniform(np.log(0.25), np.log(4.0)))) * math.sqrt(w)
    return segment_array(rng.standard_normal(n + w), w), KernelSpec(family, h)


def make_fit(atoms, weights):
    n = len(atoms)
    return RnwFit(0.0, np.full(n, 1 / n), np.asarray(weights), np.asarray(atoms, dtype=float), np.ones(n), np.zeros(n))


def scan_quantile(atoms, weights, beta):
    order = np.argsort(atoms, kind="stable")
    run = 0.0
    for i in order:
        run += weights[i]
        if run >= beta - 1e-12:
            return atoms[i]
    return atoms[order[-1]]


def bisect_lambda(S):
    lo, hi = -1.0 / S.max(), -1.0 / S.min()
    while True:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            return mid
        if np.sum(S / (1 + mid * S)) > 0:
            lo = mid
        else:
            hi = mid


def test_c01_weight_identities(capsys):
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst_p = worst_s = worst_w = 0.0
    feasible = simplex = True
    for _ in range(1000):
        seg, kernel = random_segments(rng)
        fit = fit_rnw(seg, kernel)
        worst_w = max(worst_w, abs(fit.weights.sum() - 1))
        simplex &= bool(np.all(fit.weights >= 0))
        if not fit.degenerate:
            worst_p = max(worst_p, abs(fit.adjustment.sum() - 1))
            worst_s = max(worst_s, abs(np.dot(fit.adjustment, fit.S)))
            feasible &= bool(np.all(1 + fit.lam * fit.S > 0))
    elapsed = time.perf_counter() - t0
    ok = worst_p < 1e-10 and worst_s < 1e-8 and worst_w < 1e-10 and simplex and feasible and elapsed < 10
    report(
        capsys, 1, ok,
        f"max|sum p-1|={worst_p:.1e} max|sum pS|={worst_s:.1e} max|sum W-1|={worst_w:.1e} "
        f"simplex={simplex} feasible={feasible} time={elapsed:.2f}s",
    )
    assert ok


def test_c02_kernel_scale_invariance(capsys):
    rng = np.random.default_rng(102)
    worst = 0.0
    for _ in range(100):
        seg, kernel = random_segments(rng)
        fit = fit_rnw(seg, kernel)
        d = seg.predictors[:, 0] - seg.query[0]
        for c in (1e-3, 1.0, 1e3):
            _, _, W, _ = rnw_weights(d, c * fit.kernel_values)
            worst = max(worst, float(np.max(np.abs(W - fit.weights))))
    ok = worst <= 1e-10
    report(capsys, 2, ok, f"max |dW| over 100 fits x c in {{1e-3,1,1e3}} = {worst:.1e}")
    assert ok


def brute_beta_star(fit, alpha, step):
    k = int(round(alpha / step))
    best = None
    for j in range(k + 1):
        b = alpha if j == k else j * step
        lo, hi = scan_quantile(fit.atoms, fit.weights, b), scan_quantile(fit.atoms, fit.weights, min(1.0, 1 - alpha + b))
        if best is None or hi - lo < best[2] - best[1]:
            best = (b, lo, hi)
    return best


def test_c03_oracle_equivalence(capsys):
    rng = np.random.default_rng(103)
    q_mismatch = b_mismatch = 0
    for _ in range(10_000):
        n = int(rng.integers(1, 9))
        atoms = rng.integers(-4, 5, n).astype(float)
        w = rng.random(n)
        w /= w.sum()
        fit = make_fit(atoms, w)
        beta = float(rng.random()) if rng.random() < 0.8 else float(np.cumsum(w)[rng.integers(n)])
        beta = min(beta, 1.0)
        q_mismatch += fit.quantile(beta) != scan_quantile(atoms, w, beta)
        alpha = float(rng.choice([0.05, 0.1, 0.2]))
        b_mismatch += beta_star_search(fit, alpha, 0.005) != brute_beta_star(fit, alpha, 0.005)
    ok = q_mismatch == 0 and b_mismatch == 0
    report(capsys, 3, ok, f"quantile mismatches={q_mismatch}/10000 beta* mismatches={b_mismatch}/10000")
    assert ok


def test_c04_lambda_solver(capsys):
    rng = np.random.default_rng(104)
    worst_res = worst_gap = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 201))
        S = rng.standard_normal(n) * np.exp(rng.uniform(-3, 3))
        if not (S.max() > 0 > S.min()):
            S[0] = -np.sign(S[1]) * abs(S[0])
        lam, deg = solve_lambda(S)
        assert not deg
        worst_res = max(worst_res, abs(float(np.sum(S / (1 + lam * S)))))
        worst_gap = max(worst_gap, abs(lam - bisect_lambda(S)))
    lam, _ = solve_lambda([2.0, -1.0])
    ok = worst_res < 1e-10 and worst_gap < 1e-9 and abs(lam - 0.25) <= 1e-10
    report(capsys, 4, ok, f"max|stationarity|={worst_res:.1e} max|lam-bisect|={worst_gap:.1e} lam(2,-1)={lam!r}")
    assert ok


def test_c05_reductions(capsys):
    rng = np.random.default_rng(105)
    exact = True
    for _ in range(200):
        seg, kernel = random_segments(rng)
        fit = fit_rnw(seg, kernel, plain=True)
        K = fit.kernel_values
        expected = K / K.sum() if K.sum() > 0 else np.full(seg.n, 1 / seg.n)
        exact &= bool(np.array_equal(fit.weights, expected))
    e = rng.uniform(0, 1, 400)
    m = KOWCPI(ResidualHistory(400, e), 0.1, 1, KernelSpec("boxcar", 1e6))
    r = m.step(yhat=0.0)
    resp = np.sort(e[1:])
    n = resp.size
    widths = []
    for b in beta_grid(0.1, 0.005):
        lo = resp[max(0, math.ceil(b * n - 1e-9) - 1)]
        hi = resp[min(n - 1, math.ceil((0.9 + b) * n - 1e-9) - 1)]
        widths.append(hi - lo)
    empirical = min(widths)
    atom = float(np.max(np.diff(resp)))
    within = abs(r.width - empirical) <= atom
    ok = exact and within
    report(
        capsys, 5, ok,
        f"plain-NW exact on 200 fits={exact}; uniform-limit width {r.width:.4f} vs empirical {empirical:.4f} "
        f"(one atom = {atom:.4f})",
    )
    assert ok


def test_c06_aic_components(capsys):
    rng = np.random.default_rng(106)
    worst = 0.0
    for _ in range(50):
        n, w = int(rng.integers(5, 80)), int(rng.integers(1, 6))
        seg = segment_array(rng.standard_normal(n + w), w)
        sm = build_smoother(seg, KernelSpec(FAMILIES[int(rng.integers(3))], float(rng.uniform(0.3, 4))))
        brute = 0.0
        for i in range(sm.n):
            for j in range(sm.n):
                brute += sm.entries[i, j] ** 2
        worst = max(worst, abs(sm.trace_sst - brute))
    ident = aic_c(SmootherMatrix(np.eye(10), 10.0, 0.0))
    ok = worst < 1e-10 and ident is None
    report(capsys, 6, ok, f"max|tr(SS')-brute|={worst:.1e}; identity smoother inadmissible={ident is None}")
    assert ok


def test_c07_ks_machinery(capsys):
    rng = np.random.default_rng(107)
    mismatches = 0
    for _ in range(10_000):
        a = rng.integers(-6, 7, int(rng.integers(1, 25))).astype(float)
        b = rng.integers(-6, 7, int(rng.integers(1, 25))).astype(float)
        grid = np.union1d(a, b)
        brute = max(abs(np.mean(a <= g) - np.mean(b <= g)) for g in grid)
        mismatches += abs(ks_statistic(a, b) - brute) > 1e-15
    p0 = ks_pvalue(0.0, 50, 50)
    p1 = ks_pvalue(1.0, 50, 50)
    # second route for the p-value: scipy's Kolmogorov survival function
    zs = np.linspace(0.0, 3.0, 301)
    scipy_gap = max(abs(ks_pvalue(z / 5.0, 50, 50) - float(kolmogorov(z))) for z in zs)
    ok = mismatches == 0 and p0 == 1.0 and p1 < 1e-10 and scipy_gap < 1e-10
    report(
        capsys, 7, ok,
        f"KS mismatches={mismatches}/10000; p(D=0)={p0}; p(D=1,n=50)={p1:.1e}; max|p-scipy|={scipy_gap:.1e}",
    )
    assert ok


@pytest.fixture(scope="module")
def seasonal_runs():
    cfg = load_config(None, {**SYNTHETIC, "data.kind": "nonstationary-seasonal"})
    fixed = run_benchmark(cfg)
    adaptive_cfg = load_config(
        None,
        {
            **SYNTHETIC,
            "data.kind": "nonstationary-seasonal",
            "window": {"mode": "adaptive", "candidates": ADAPTIVE_CANDIDATES},
            "methods": ["kowcpi"],
        },
    )
    adaptive = run_benchmark(adaptive_cfg)
    return fixed, adaptive


def row(result, method):
    return next(r for r in result.table if r["method"] == method)


def test_c08_nonstationary_reproduction(capsys, seasonal_runs):
    fixed, _ = seasonal_runs
    kow, scp = row(fixed, "kowcpi"), row(fixed, "scp")
    per_seed = [round(r["kowcpi"].marginal_coverage, 3) for r in fixed.per_seed]
    ok = 0.86 <= kow["coverage_mean"] <= 0.94 and kow["width_mean"] <= scp["width_mean"]
    report(
        capsys, 8, ok,
        f"KOWCPI coverage {kow['coverage_mean']:.3f} (std {kow['coverage_std']:.3f}, per seed {per_seed}) "
        f"width {kow['width_mean']:.2f} vs SCP width {scp['width_mean']:.2f}",
    )
    assert ok


def test_c09_heteroskedastic_mixture(capsys):
    cfg = load_config(None, {**SYNTHETIC, "data.kind": "hetero-mixture"})
    res = run_benchmark(cfg)
    cov = [r["kowcpi"].marginal_coverage for r in res.per_seed]
    widths = np.concatenate([r["kowcpi"].widths for r in res.per_seed])
    inside = sum(0.85 <= c <= 0.95 for c in cov)
    finite = bool(np.all(np.isfinite(widths)) and np.all(widths > 0))
    ok = inside >= 4 and finite
    report(
        capsys, 9, ok,
        f"paths in [0.85,0.95]: {inside}/5 (coverage {[round(c, 3) for c in cov]}); widths finite and positive={finite}",
    )
    assert ok


def test_c10_adaptive_window_parity(capsys, seasonal_runs):
    fixed, adaptive = seasonal_runs
    a = row(adaptive, "kowcpi")["coverage_mean"]
    f = row(fixed, "kowcpi")["coverage_mean"]
    ok = abs(a - f) <= 0.03
    report(capsys, 10, ok, f"adaptive coverage {a:.4f} vs fixed-w coverage {f:.4f} (diff {a - f:+.4f})")
    assert ok


def test_c11_bench_replay(capsys, tmp_path):
    first, second = tmp_path / "first", tmp_path / "second"
    args = ["--set", "data.length=600", "--set", "window.w=3", "--seeds", "0", "1"]
    assert cli_main(["bench", "--out", str(first), *args]) == 0
    assert cli_main(["bench", "--config", str(first / "manifest.json"), "--out", str(second)]) == 0
    names = ("results.csv", "per_seed.csv", "results.json")
    same = {n: (first / n).read_bytes() == (second / n).read_bytes() for n in names}
    ok = all(same.values())
    report(capsys, 11, ok, "byte-identical replay: " + ", ".join(f"{n}={v}" for n, v in same.items()))
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
