"""Window-length selection: validation-split search and an adaptive KS rule."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .embedding import ResidualHistory

MODES = ("fixed", "cv", "adaptive")


def default_candidates(T: int) -> tuple[int, ...]:
    top = min(100, T // 2)
    return tuple(range(5, top + 1, 5)) or (max(1, min(T - 2, T // 2)),)


@dataclass(frozen=True)
class WindowPolicy:
    mode: str = "fixed"
    w: int = 10
    candidates: tuple[int, ...] = field(default_factory=tuple)
    p_threshold: float = 0.01

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"window mode must be one of {MODES}, got {self.mode!r}")
        if not 0 < self.p_threshold < 1:
            raise ValueError(f"p_threshold must lie in (0, 1), got {self.p_threshold}")
        c = tuple(int(v) for v in self.candidates)
        if any(b <= a for a, b in zip(c, c[1:])):
            raise ValueError(f"window candidates must be strictly increasing, got {c}")
        object.__setattr__(self, "candidates", c)

    def resolved_candidates(self, T: int) -> tuple[int, ...]:
        if self.mode == "fixed":
            return (self.w,)
        return self.candidates or default_candidates(T)

    def validate(self, T: int) -> None:
        cands = self.resolved_candidates(T)
        bad = [w for w in cands if not 1 <= w <= T - 2]
        if bad:
            raise ValueError(f"window lengths {bad} out of range [1, {T - 2}] for T={T}")
        if self.mode == "adaptive" and 2 * max(cands) > T:
            raise ValueError(f"adaptive window needs 2*max(candidates) <= T; got max {max(cands)} with T={T}")


def ks_statistic(a, b) -> float:
    """sup_x |F_a(x) - F_b(x)| evaluated at every point of the merged sample."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise ValueError("KS statistic needs two nonempty samples")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_pvalue(D: float, n_a: int, n_b: int) -> float:
    """Asymptotic two-sample KS p-value from the Kolmogorov distribution.

    For z >= 1 the alternating series 2 sum (-1)^(j-1) exp(-2 j^2 z^2) is
    summed until terms drop below 1e-12. Below that it converges slowly (and
    not at all at z = 0), so we use the equivalent theta-function form of
    the Kolmogorov CDF instead.
    """
    if not 0 <= D <= 1:
        raise ValueError(f"KS statistic must lie in [0, 1], got {D}")
    z = D * math.sqrt(n_a * n_b / (n_a + n_b))
    if z < 0.1:
        # Kolmogorov CDF is below 1e-40 here and 1/z^2 would overflow
        return 1.0
    if z < 1.0:
        c = math.sqrt(2 * math.pi) / z
        cdf = 0.0
        for j in range(1, 100):
            term = c * math.exp(-((2 * j - 1) ** 2) * math.pi**2 / (8 * z * z))
            cdf += term
            if term < 1e-16:
                break
        p = 1.0 - cdf
    else:
        p = 0.0
        for j in range(1, 1000):
            term = 2.0 * math.exp(-2.0 * j * j * z * z)
            p += term if j % 2 else -term
            if term < 1e-12:
                break
    return min(1.0, max(0.0, p))


def adaptive_window(history: ResidualHistory | np.ndarray, policy: WindowPolicy) -> int:
    """Smallest candidate w whose last-w vs preceding-w residual blocks differ (KS p < threshold).

    If no candidate triggers, the largest candidate is returned.
    """
    e = history.values if isinstance(history, ResidualHistory) else np.asarray(history, dtype=float)
    T = e.shape[0]
    cands = policy.resolved_candidates(T)
    if 2 * max(cands) > T:
        raise ValueError(f"window candidate {max(cands)} exceeds T/2 = {T / 2}")
    for w in cands:
        recent, previous = e[T - w :], e[T - 2 * w : T - w]
        if ks_pvalue(ks_statistic(recent, previous), w, w) < policy.p_threshold:
            return w
    return cands[-1]


def cv_window(
    candidates: Sequence[int],
    alpha: float,
    evaluate: Callable[[int], tuple[float, float]],
) -> tuple[int, list[dict]]:
    """Pick the narrowest candidate reaching coverage 1 - alpha on validation data.

    ``evaluate(w)`` runs the interval pipeline with window ``w`` over the
    validation split and returns ``(coverage, mean_width)``. When no
    candidate covers, the best-covering one wins (ties to smaller w).
    """
    if not candidates:
        raise ValueError("no window candidates")
    table = []
    for w in sorted(candidates):
        cov, width = evaluate(w)
        table.append({"w": int(w), "coverage": float(cov), "width": float(width)})
    ok = [r for r in table if r["coverage"] >= 1 - alpha - 1e-12]
    if ok:
        best = min(ok, key=lambda r: (r["width"], r["w"]))
    else:
        best = min(table, key=lambda r: (-r["coverage"], r["w"]))
    return best["w"], table
