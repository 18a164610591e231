"""Reweighted Nadaraya-Watson (RNW) conditional CDF and quantiles.

The adjustment weights come from an empirical-likelihood problem whose dual
is one-dimensional: with S_i = ([X_i]_1 - [x]_1) K_h(X_i - x),

    p_i = 1 / (n (1 + lam * S_i)),

where ``lam`` is the stationary point of L(lam) = -sum log(1 + lam S_i).
Final weights are W_i = p_i K_i / sum_j p_j K_j.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .embedding import SegmentSet
from .kernels import KernelSpec, kernel_from_distances

LAMBDA_TOL = 1e-12
# Bisection bracket is pulled this far inside the feasibility poles (normalized units).
POLE_SHRINK = 1e-9
BRACKET_TOL = 1e-14
MAX_ITER = 200
BRACKET_LIMIT = 1e300
# Cumulative weights within this of beta count as reaching it (absorbs summation round-off).
QUANTILE_TOL = 1e-12


def _mixed_sign(s: np.ndarray) -> np.ndarray:
    return (s > 0).any(axis=-1) & (s < 0).any(axis=-1)


def _solve_rows(s: np.ndarray, tol: float) -> np.ndarray:
    """Root of g(mu) = sum_j s_ij / (1 + mu s_ij) for every row of ``s``.

    Rows must be mixed-sign and scaled so that max |s_ij| = 1. g is strictly
    decreasing on the feasible interval, so a Newton step is accepted only
    when it stays inside the current bracket; otherwise we bisect.
    """
    m = s.shape[0]
    # subnormal extremes put a pole out past the float range; keep the bracket finite
    with np.errstate(divide="ignore", over="ignore"):
        lo = np.maximum(-1.0 / s.max(axis=1), -BRACKET_LIMIT) + POLE_SHRINK
        hi = np.minimum(-1.0 / s.min(axis=1), BRACKET_LIMIT) - POLE_SHRINK
    mu = np.zeros(m)
    active = np.ones(m, dtype=bool)
    for _ in range(MAX_ITER):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        sa = s[idx]
        d = 1.0 + mu[idx, None] * sa
        g = (sa / d).sum(axis=1)
        gp = -((sa / d) ** 2).sum(axis=1)

        done = np.abs(g) < tol
        pos = g > 0
        lo[idx] = np.where(pos & ~done, mu[idx], lo[idx])
        hi[idx] = np.where(~pos & ~done, mu[idx], hi[idx])
        done |= (hi[idx] - lo[idx]) < BRACKET_TOL

        step = mu[idx] - g / gp
        inside = (step > lo[idx]) & (step < hi[idx])
        nxt = np.where(inside, step, 0.5 * (lo[idx] + hi[idx]))
        mu[idx] = np.where(done, mu[idx], nxt)
        active[idx[done]] = False
    return mu


def _lambda_rows(S: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Solve the dual for each row of ``S``; returns (lam, degenerate)."""
    S = np.atleast_2d(S)
    lam = np.zeros(S.shape[0])
    mixed = _mixed_sign(S)
    if mixed.any():
        Sm = S[mixed]
        scale = np.abs(Sm).max(axis=1)
        # Solving in scaled units makes lam exactly equivariant under S -> cS.
        mu = _solve_rows(Sm / scale[:, None], tol)
        lam[mixed] = mu / scale
    return lam, ~mixed


def solve_lambda(S, tolerance: float = LAMBDA_TOL) -> tuple[float, bool]:
    """Stationary point of L(lam) = -sum log(1 + lam S_i).

    Returns ``(0.0, True)`` when no interior stationary point exists (all
    S_i zero, or all nonzero S_i of one sign).
    """
    S = np.asarray(S, dtype=float).ravel()
    if not np.all(np.isfinite(S)):
        raise ValueError("S contains non-finite entries")
    if tolerance <= 0:
        raise ValueError(f"tolerance must be positive, got {tolerance}")
    lam, degenerate = _lambda_rows(S[None, :], tolerance)
    return float(lam[0]), bool(degenerate[0])


def stationarity_residual(S, lam: float) -> float:
    S = np.asarray(S, dtype=float)
    return float(np.sum(S / (1.0 + lam * S)))


@dataclass(frozen=True)
class RnwFit:
    """RNW weights for one query point, plus the weighted ECDF they induce."""

    lam: float
    adjustment: np.ndarray
    weights: np.ndarray
    atoms: np.ndarray
    kernel_values: np.ndarray
    S: np.ndarray
    degenerate: bool = False
    _sorted_atoms: np.ndarray = field(init=False, repr=False, compare=False)
    _cumulative: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        order = np.argsort(self.atoms, kind="stable")
        object.__setattr__(self, "_sorted_atoms", self.atoms[order])
        object.__setattr__(self, "_cumulative", np.cumsum(self.weights[order]))

    @property
    def n(self) -> int:
        return self.atoms.shape[0]

    def cdf(self, b: float) -> float:
        k = np.searchsorted(self._sorted_atoms, b, side="right")
        return 0.0 if k == 0 else float(min(1.0, self._cumulative[k - 1]))

    def quantile(self, beta):
        """Generalized inverse inf{y : F(y) >= beta}; beta = 0 gives the smallest atom."""
        b = np.asarray(beta, dtype=float)
        if np.any((b < 0) | (b > 1)) or np.any(np.isnan(b)):
            raise ValueError(f"quantile level must lie in [0, 1], got {beta}")
        k = np.searchsorted(self._cumulative, b - QUANTILE_TOL, side="left")
        out = self._sorted_atoms[np.minimum(k, self.n - 1)]
        return float(out) if out.ndim == 0 else out


def rnw_weights(first_diff, kernel_values, *, plain: bool = False, tolerance: float = LAMBDA_TOL):
    """Adjustment and final weights from first-coordinate offsets and kernel values.

    Returns ``(lam, p, W, degenerate)``. ``plain=True`` pins lam = 0, which
    gives classical Nadaraya-Watson weights W_i proportional to K_i.
    """
    d = np.asarray(first_diff, dtype=float)
    K = np.asarray(kernel_values, dtype=float)
    n = K.shape[0]
    S = d * K
    if plain:
        lam, degenerate = 0.0, False
    else:
        lam, degenerate = solve_lambda(S, tolerance)
    p = 1.0 / (n * (1.0 + lam * S))
    # with lam pinned at zero the uniform p cancels; skip it so the reduction is exact
    pk = K if plain else p * K
    total = pk.sum()
    if total > 0:
        W = pk / total
    else:
        W = np.full(n, 1.0 / n)
        degenerate = True
    return lam, p, W, degenerate


def fit_query(predictors, responses, query, kernel: KernelSpec, *, plain: bool = False) -> RnwFit:
    X = np.asarray(predictors, dtype=float)
    x = np.asarray(query, dtype=float)
    w = X.shape[1]
    if x.shape != (w,):
        raise ValueError(f"query has shape {x.shape}, expected ({w},)")
    K = kernel_from_distances(kernel, cdist(x[None, :], X)[0], w)
    d = X[:, 0] - x[0]
    lam, p, W, degenerate = rnw_weights(d, K, plain=plain)
    return RnwFit(
        lam=lam,
        adjustment=p,
        weights=W,
        atoms=np.asarray(responses, dtype=float),
        kernel_values=K,
        S=d * K,
        degenerate=degenerate,
    )


def fit_rnw(segments: SegmentSet, kernel: KernelSpec, *, plain: bool = False) -> RnwFit:
    return fit_query(segments.predictors, segments.responses, segments.query, kernel, plain=plain)


def weight_matrix(predictors, kernel: KernelSpec, *, plain: bool = False) -> np.ndarray:
    """Row i holds the RNW weights for query ``predictors[i]`` over all rows."""
    X = np.asarray(predictors, dtype=float)
    n, w = X.shape
    K = kernel_from_distances(kernel, cdist(X, X), w)
    D = X[None, :, 0] - X[:, 0, None]
    S = D * K
    if plain:
        lam = np.zeros(n)
    else:
        lam, _ = _lambda_rows(S, LAMBDA_TOL)
    pk = K if plain else K / (n * (1.0 + lam[:, None] * S))
    total = pk.sum(axis=1, keepdims=True)
    # self-distance is zero, so every row has K_ii > 0 and total > 0
    return pk / total


def cdf(fit: RnwFit, b: float) -> float:
    return fit.cdf(b)


def quantile(fit: RnwFit, beta):
    return fit.quantile(beta)


def discrete_gap(fit: RnwFit) -> float:
    """Largest single atom mass; bounds the ECDF inversion error."""
    return float(fit.weights.max())
