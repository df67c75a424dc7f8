"""Seed sets and trajectory bundles shared by the classical and Bohmian flows."""
from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class SeedSet:
    """Sorted starting points with their initial densities as weights."""

    seeds: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        seeds = np.asarray(self.seeds, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if seeds.ndim != 1 or seeds.shape != weights.shape:
            raise ValueError("seeds and weights must be matching 1D arrays")
        if np.any(np.diff(seeds) <= 0):
            raise ValueError("seeds must be strictly increasing")
        if np.any(weights < 0):
            raise ValueError("weights must be non-negative")
        object.__setattr__(self, "seeds", seeds)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return self.seeds.size

    def quadrature_weights(self):
        """Trapezoid weights ``rho0(y_i) * dy_i`` on the seed points."""
        y = self.seeds
        if y.size == 1:
            return self.weights.copy()
        dy = np.empty_like(y)
        dy[1:-1] = 0.5 * (y[2:] - y[:-2])
        dy[0] = 0.5 * (y[1] - y[0])
        dy[-1] = 0.5 * (y[-1] - y[-2])
        return self.weights * dy


def uniform_seeds(amplitude, count, rel=1e-3, interval=None):
    """``count`` equally spaced seeds over the interval where ``a0 >= rel max a0``."""
    lo, hi = interval if interval is not None else amplitude.support(rel)
    y = np.linspace(lo, hi, int(count)) if count > 1 else np.array([0.5 * (lo + hi)])
    return SeedSet(y, np.abs(amplitude.value(y)) ** 2)


def quantile_seeds(amplitude, count, rel=1e-3, interval=None, resolution=20001):
    """Seeds at equally spaced quantiles of ``|a0|^2`` over the support."""
    lo, hi = interval if interval is not None else amplitude.support(rel)
    grid = np.linspace(lo, hi, resolution)
    rho = np.abs(amplitude.value(grid)) ** 2
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (rho[1:] + rho[:-1]))])
    cdf /= cdf[-1]
    q = (np.arange(count) + 0.5) / count
    y = np.interp(q, cdf, grid)
    return SeedSet(y, np.abs(amplitude.value(y)) ** 2)


@dataclass(frozen=True)
class TrajectoryBundle:
    """Trajectories ``x[i, j] = X(times[j], seeds[i])`` and momenta ``p``.

    ``epsilon`` is ``None`` for classical bundles, which also carry ``jac``.
    Bohmian bundles may carry ``min_density``: for each trajectory the
    smallest relative density ``rho(X) / max rho`` met during the run, divided
    by its value at the seed.
    """

    seeds: np.ndarray
    times: np.ndarray
    x: np.ndarray
    p: np.ndarray
    epsilon: Optional[float] = None
    jac: Optional[np.ndarray] = None
    min_density: Optional[np.ndarray] = None

    def __post_init__(self):
        m, t = len(self.seeds), len(self.times)
        for name in ("x", "p"):
            arr = getattr(self, name)
            if arr.shape != (m, t):
                raise ValueError(f"{name} must have shape {(m, t)}, got {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")

    @property
    def classical(self):
        return self.epsilon is None

    def at_time(self, t):
        """Column index of the snapshot closest to ``t``."""
        return int(np.argmin(np.abs(self.times - t)))
