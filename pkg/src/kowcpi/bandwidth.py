"""Bandwidth selection by the corrected nonparametric AIC of a linear smoother."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .embedding import SegmentSet
from .kernels import KernelSpec
from .rnw import weight_matrix

DEFAULT_GRID_SIZE = 15
DEFAULT_GRID_SPAN = 8.0


@dataclass(frozen=True)
class SmootherMatrix:
    entries: np.ndarray
    trace_sst: float
    rss: float

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class BandwidthSelection:
    kernel: KernelSpec
    grid: tuple[float, ...]
    aic: tuple[float | None, ...]
    fallback: bool

    @property
    def bandwidth(self) -> float:
        return self.kernel.bandwidth


def build_smoother(segments: SegmentSet, kernel: KernelSpec) -> SmootherMatrix:
    """Smoother whose row i is the RNW weight vector at query X_i (self included)."""
    S = weight_matrix(segments.predictors, kernel)
    y = segments.responses
    fitted = S @ y
    return SmootherMatrix(
        entries=S,
        trace_sst=float(np.einsum("ij,ij->", S, S)),
        rss=float(np.sum((y - fitted) ** 2)),
    )


def aic_c(sm: SmootherMatrix, n: int | None = None) -> float | None:
    """log(RSS) + (n + tr(SS')) / (n - tr(SS') - 2), or None when inadmissible."""
    return aic_value(sm.rss, sm.trace_sst, sm.n if n is None else n)


def aic_value(rss: float, trace: float, n: int) -> float | None:
    if n < 4:
        raise ValueError(f"AIC_C needs n >= 4, got {n}")
    denom = n - (trace + 2.0)
    if denom <= 0 or rss <= 0:
        return None
    return math.log(rss) + (n + trace) / denom


def rule_of_thumb(segments: SegmentSet) -> float:
    """h0 = sd(residuals) * n**(-1/(w+4)); falls back to 1 for a constant history."""
    e = np.concatenate([segments.predictors[0][::-1], segments.responses])
    sd = float(np.std(e, ddof=1)) if e.size > 1 else 0.0
    if not sd > 0:
        sd = 1.0
    return sd * segments.n ** (-1.0 / (segments.w + 4))


def default_grid(segments: SegmentSet, size: int = DEFAULT_GRID_SIZE, span: float = DEFAULT_GRID_SPAN) -> np.ndarray:
    h0 = rule_of_thumb(segments)
    return np.geomspace(h0 / span, h0 * span, size)


def select_bandwidth(
    segments: SegmentSet,
    grid=None,
    family: str = "epanechnikov",
    *,
    grid_size: int = DEFAULT_GRID_SIZE,
    grid_span: float = DEFAULT_GRID_SPAN,
) -> BandwidthSelection:
    """Pick the admissible grid bandwidth with the smallest AIC_C.

    Ties go to the smaller bandwidth. If no candidate is admissible the
    rule-of-thumb bandwidth is returned with ``fallback=True``.
    """
    if grid is None:
        grid = default_grid(segments, grid_size, grid_span)
    grid = np.sort(np.asarray(grid, dtype=float).ravel())
    if grid.size == 0:
        raise ValueError("bandwidth grid is empty")
    scores = []
    for h in grid:
        sm = build_smoother(segments, KernelSpec(family, float(h)))
        scores.append(aic_c(sm, segments.n))
    best = None
    for h, a in zip(grid, scores):
        if a is not None and (best is None or a < best[1]):
            best = (float(h), a)
    if best is None:
        h0 = rule_of_thumb(segments)
        warnings.warn(f"no admissible bandwidth in grid; using rule-of-thumb h0={h0:.4g}", RuntimeWarning, stacklevel=2)
        return BandwidthSelection(KernelSpec(family, h0), tuple(map(float, grid)), tuple(scores), True)
    return BandwidthSelection(KernelSpec(family, best[0]), tuple(map(float, grid)), tuple(scores), False)
