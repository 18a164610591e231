"""Sequential KOWCPI intervals: per-step RNW fit, beta* search, residual update."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .bandwidth import BandwidthSelection, select_bandwidth
from .embedding import ResidualHistory, build_segments, segment_array
from .kernels import KernelSpec
from .rnw import RnwFit, discrete_gap, fit_rnw
from .window import WindowPolicy, adaptive_window

DEFAULT_BETA_STEP = 0.005


@dataclass
class IntervalResult:
    t: int
    lower: float
    upper: float
    beta_star: float
    gap: float
    degenerate: bool
    yhat: float
    w: int
    bandwidth: float
    covered: bool | None = None
    y: float | None = None

    @property
    def width(self) -> float:
        return self.upper - self.lower


def beta_grid(alpha: float, step: float) -> np.ndarray:
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if not step > 0:
        raise ValueError(f"beta grid step must be positive, got {step}")
    k = int(round(alpha / step))
    if k < 1 or abs(k * step - alpha) > 1e-12:
        raise ValueError(f"beta grid step {step} does not divide alpha={alpha}")
    grid = np.arange(k + 1) * step
    grid[-1] = alpha
    return grid


def beta_star_search(fit: RnwFit, alpha: float, step: float = DEFAULT_BETA_STEP) -> tuple[float, float, float]:
    """Shortest [Q_beta, Q_{1-alpha+beta}] over the beta grid; ties go to the smallest beta."""
    betas = beta_grid(alpha, step)
    lo = fit.quantile(betas)
    hi = fit.quantile(np.minimum(1.0 - alpha + betas, 1.0))
    k = int(np.argmin(hi - lo))
    return float(betas[k]), float(lo[k]), float(hi[k])


def resolve_bandwidths(
    residuals,
    windows: Sequence[int],
    family: str = "epanechnikov",
    grid=None,
    grid_size: int = 15,
    grid_span: float = 8.0,
) -> dict[int, BandwidthSelection]:
    """AIC bandwidth for each window length, fitted on one residual buffer."""
    out = {}
    for w in windows:
        seg = segment_array(residuals, w)
        out[w] = select_bandwidth(seg, grid, family, grid_size=grid_size, grid_span=grid_span)
    return out


class KOWCPI:
    """One-step-ahead interval machine; ``step`` and ``observe`` must alternate.

    ``kernels`` maps each usable window length to its kernel (a single
    KernelSpec is accepted for a fixed window). ``predictor`` is anything
    with ``predict(x) -> float``; it may be omitted when point predictions
    are passed to ``step`` directly.
    """

    def __init__(
        self,
        history: ResidualHistory,
        alpha: float,
        window: WindowPolicy | int,
        kernels: KernelSpec | Mapping[int, KernelSpec],
        *,
        beta_step: float = DEFAULT_BETA_STEP,
        predictor=None,
        plain: bool = False,
        reselect_every: int | None = None,
        bandwidth_grid=None,
        t0: int = 0,
    ):
        if not history.full:
            raise ValueError("residual history must be full before intervals can be issued")
        self.history = history
        self.alpha = float(alpha)
        self.beta_step = float(beta_step)
        beta_grid(self.alpha, self.beta_step)
        self.policy = WindowPolicy("fixed", w=window) if isinstance(window, int) else window
        self.policy.validate(history.capacity)
        if isinstance(kernels, KernelSpec):
            kernels = {w: kernels for w in self.policy.resolved_candidates(history.capacity)}
        self.kernels = dict(kernels)
        missing = [w for w in self.policy.resolved_candidates(history.capacity) if w not in self.kernels]
        if missing:
            raise ValueError(f"no kernel configured for window lengths {missing}")
        self.predictor = predictor
        self.plain = plain
        self.reselect_every = reselect_every
        self.bandwidth_grid = bandwidth_grid
        self.t = t0
        self.results: list[IntervalResult] = []
        self._pending: IntervalResult | None = None
        self._observed = 0

    def current_window(self) -> int:
        if self.policy.mode == "adaptive":
            return adaptive_window(self.history, self.policy)
        if self.policy.mode == "fixed":
            return self.policy.w
        raise ValueError("cv window policy must be resolved to a fixed window before streaming")

    def fit_current(self) -> tuple[RnwFit, int, KernelSpec]:
        w = self.current_window()
        kernel = self.kernels[w]
        return fit_rnw(build_segments(self.history, w), kernel, plain=self.plain), w, kernel

    def step(self, x=None, *, yhat: float | None = None) -> IntervalResult:
        if self._pending is not None:
            raise RuntimeError("step called twice without observe")
        if yhat is None:
            if self.predictor is None or x is None:
                raise ValueError("step needs features with a predictor, or yhat")
            yhat = self.predictor.predict(x)
        fit, w, kernel = self.fit_current()
        beta, q_lo, q_hi = beta_star_search(fit, self.alpha, self.beta_step)
        res = IntervalResult(
            t=self.t,
            lower=float(yhat) + q_lo,
            upper=float(yhat) + q_hi,
            beta_star=beta,
            gap=discrete_gap(fit),
            degenerate=fit.degenerate,
            yhat=float(yhat),
            w=w,
            bandwidth=kernel.bandwidth,
        )
        self._pending = res
        return res

    def observe(self, y: float) -> IntervalResult:
        res = self._pending
        if res is None:
            raise RuntimeError("observe called without a preceding step")
        res.y = float(y)
        res.covered = bool(res.lower <= y <= res.upper)
        self.history.push(y - res.yhat)
        self.results.append(res)
        self._pending = None
        self.t += 1
        self._observed += 1
        if self.reselect_every and self._observed % self.reselect_every == 0:
            self._reselect()
        return res

    def _reselect(self) -> None:
        for w, kernel in list(self.kernels.items()):
            seg = build_segments(self.history, w)
            self.kernels[w] = select_bandwidth(seg, self.bandwidth_grid, kernel.family).kernel


def run_stream(machine: KOWCPI, yhat, y) -> list[IntervalResult]:
    """Feed aligned point predictions and outcomes through ``machine``."""
    out = []
    for f, obs in zip(yhat, y):
        machine.step(yhat=f)
        out.append(machine.observe(obs))
    return out
