"""Seeded synthetic series: AR(1)-GARCH(1,1) mixture, a seasonal nonlinear
autoregression with AR(1) noise, and a plain AR(1)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import stream

KINDS = ("hetero-mixture", "nonstationary-seasonal", "ar1")
SEASONAL_LAGS = 100
SEASON = 12


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str = "nonstationary-seasonal"
    length: int = 2000
    seed: int = 0
    burn_in: int = 200
    phi: float = 0.5
    sigma: float = 1.0
    sigma0_sq: float = 0.1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"generator kind must be one of {KINDS}, got {self.kind!r}")
        if self.length <= 0:
            raise ValueError(f"length must be positive, got {self.length}")
        if self.burn_in < 0:
            raise ValueError(f"burn_in must be >= 0, got {self.burn_in}")
        if self.kind == "hetero-mixture" and not self.sigma0_sq > 0:
            raise ValueError("hetero-mixture needs sigma0_sq > 0")


def hetero_recursion(eps, xi, y0: float = 0.0, sigma0_sq: float = 0.1):
    """Y_t = 0.8 Y_{t-1} + sigma_t eps_t + xi_t with
    sigma_t^2 = 0.1 + 0.3 Y_{t-1}^2 + 0.6 sigma_{t-1}^2.

    ``xi`` is the already-scaled N(0, 0.1^2) noise. Returns (y, sigma_sq).
    """
    eps = np.asarray(eps, dtype=float)
    xi = np.asarray(xi, dtype=float)
    n = eps.shape[0]
    y = np.empty(n)
    s2 = np.empty(n)
    y_prev, s2_prev = float(y0), float(sigma0_sq)
    for t in range(n):
        s2_prev = 0.1 + 0.3 * y_prev * y_prev + 0.6 * s2_prev
        y_prev = 0.8 * y_prev + np.sqrt(s2_prev) * eps[t] + xi[t]
        y[t], s2[t] = y_prev, s2_prev
    return y, s2


def generate_hetero(spec: GeneratorSpec) -> np.ndarray:
    rng = stream(spec.seed, "hetero-noise")
    total = spec.burn_in + spec.length
    eps = rng.standard_normal(total)
    xi = 0.1 * rng.standard_normal(total)
    y, _ = hetero_recursion(eps, xi, 0.0, spec.sigma0_sq)
    return y[spec.burn_in :]


def seasonal_beta(seed: int) -> np.ndarray:
    """Feature coefficients, drawn once per seed as N(0, 1/100)."""
    return stream(seed, "seasonal-beta").standard_normal(SEASONAL_LAGS) / np.sqrt(SEASONAL_LAGS)


def seasonal_phase(t):
    """t' = t mod 12, with 0 mapped to 12 so log(t') is defined."""
    tp = np.mod(np.asarray(t), SEASON)
    return np.where(tp == 0, SEASON, tp)


def seasonal_recursion(xi, beta, t0: int = 1):
    """Y_t = log(t') sin(2 pi t'/12) (|z| + z^2 + |z|^3)^(1/4) + eps_t, z = beta'X_t,
    X_t = (Y_{t-100}, ..., Y_{t-1}), eps_t = 0.6 eps_{t-1} + xi_t.

    Values before the first step are zero. ``t0`` is the time index of the
    first step; it only sets the seasonal phase.
    """
    xi = np.asarray(xi, dtype=float)
    beta = np.asarray(beta, dtype=float)
    L = beta.shape[0]
    n = xi.shape[0]
    buf = np.zeros(L + n)
    eps = 0.0
    for k in range(n):
        tp = seasonal_phase(t0 + k)
        z = float(beta @ buf[k : k + L])
        a = abs(z)
        eps = 0.6 * eps + xi[k]
        buf[L + k] = np.log(tp) * np.sin(2 * np.pi * tp / SEASON) * (a + a * a + a**3) ** 0.25 + eps
    return buf[L:]


def generate_seasonal(spec: GeneratorSpec) -> np.ndarray:
    xi = stream(spec.seed, "seasonal-noise").standard_normal(spec.burn_in + spec.length)
    # the first returned value sits at t = 1
    y = seasonal_recursion(xi, seasonal_beta(spec.seed), t0=1 - spec.burn_in)
    return y[spec.burn_in :]


def ar1_recursion(noise, phi: float, y0: float = 0.0) -> np.ndarray:
    noise = np.asarray(noise, dtype=float)
    y = np.empty(noise.shape[0])
    prev = float(y0)
    for t, e in enumerate(noise):
        prev = phi * prev + e
        y[t] = prev
    return y


def generate_ar1(spec: GeneratorSpec) -> np.ndarray:
    noise = spec.sigma * stream(spec.seed, "ar1-noise").standard_normal(spec.burn_in + spec.length)
    return ar1_recursion(noise, spec.phi)[spec.burn_in :]


def generate(spec: GeneratorSpec) -> np.ndarray:
    if spec.kind == "hetero-mixture":
        return generate_hetero(spec)
    if spec.kind == "nonstationary-seasonal":
        return generate_seasonal(spec)
    return generate_ar1(spec)
