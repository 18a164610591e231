"""Radial kernels K(u) = k(||u||) and their bandwidth-scaled forms.

Profiles are left unnormalized: k(0) is the textbook value of the 1-D
profile and no multivariate normalizing constant is applied. Every weight
computed downstream is invariant to a positive rescaling of K.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FAMILIES = ("epanechnikov", "gaussian", "boxcar")

# Gaussian profile is cut here so every family has compact support.
GAUSSIAN_RADIUS = 3.0


def profile(family: str, t):
    """Evaluate the 1-D profile k(t) for nonnegative radii ``t``."""
    t = np.asarray(t, dtype=float)
    if family == "epanechnikov":
        return np.where(t <= 1.0, 0.75 * (1.0 - t * t), 0.0)
    if family == "gaussian":
        return np.where(t <= GAUSSIAN_RADIUS, np.exp(-0.5 * t * t), 0.0)
    if family == "boxcar":
        return np.where(t <= 1.0, 0.5, 0.0)
    raise ValueError(f"unknown kernel family {family!r}; expected one of {FAMILIES}")


@dataclass(frozen=True)
class KernelSpec:
    family: str = "epanechnikov"
    bandwidth: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}; expected one of {FAMILIES}")
        if not (np.isfinite(self.bandwidth) and self.bandwidth > 0):
            raise ValueError(f"bandwidth must be positive and finite, got {self.bandwidth}")

    @property
    def support_radius(self) -> float:
        """Radius (in units of ``bandwidth``) outside which K_h vanishes."""
        return GAUSSIAN_RADIUS if self.family == "gaussian" else 1.0

    def with_bandwidth(self, h: float) -> "KernelSpec":
        return KernelSpec(self.family, float(h))


def eval_kernel(spec: KernelSpec, u, w: int | None = None) -> float:
    """Return K_h(u) = h**-w * k(||u|| / h) for a single length-``w`` vector.

    ``w`` defaults to ``len(u)``; passing it explicitly checks the length.
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {u.shape}")
    if w is not None and u.shape[0] != w:
        raise ValueError(f"kernel argument has length {u.shape[0]}, expected w={w}")
    h = spec.bandwidth
    return float(h ** (-u.shape[0]) * profile(spec.family, np.linalg.norm(u) / h))


def kernel_from_distances(spec: KernelSpec, dist, w: int) -> np.ndarray:
    """Vectorised K_h given precomputed Euclidean norms ``dist`` in dimension ``w``."""
    h = spec.bandwidth
    return h ** (-w) * profile(spec.family, np.asarray(dist, dtype=float) / h)
