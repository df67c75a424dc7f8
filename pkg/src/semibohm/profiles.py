"""Closed-form initial amplitudes, phases and potentials.

Every phase exposes ``value``, ``d1`` and ``d2`` (S0, S0', S0''), every
amplitude ``value`` and ``d1``, and every potential ``value`` and
``gradient``. All of them are vectorized over numpy arrays.
"""
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .spectral import Grid, derivative_coeffs, eval_series


# -- phases -----------------------------------------------------------------


@dataclass(frozen=True)
class ZeroPhase:
    slope_bound = 0.0

    def value(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    d1 = value
    d2 = value


@dataclass(frozen=True)
class PlanePhase:
    """``S0(x) = k x``."""

    k: float
    slope_bound = property(lambda self: abs(self.k))

    def value(self, x):
        return self.k * np.asarray(x, dtype=float)

    def d1(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.k)

    def d2(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class QuadraticPhase:
    """``S0(x) = s x**2``; ``s > 0`` spreads the rays, ``s < 0`` focuses them."""

    s: float
    slope_bound = np.inf

    def value(self, x):
        return self.s * np.asarray(x, dtype=float) ** 2

    def d1(self, x):
        return 2.0 * self.s * np.asarray(x, dtype=float)

    def d2(self, x):
        return np.full_like(np.asarray(x, dtype=float), 2.0 * self.s)


@dataclass(frozen=True)
class LogCoshPhase:
    """``S0(x) = -(1/alpha) log cosh(alpha x - beta)``.

    Then ``S0' = -tanh(alpha x - beta)`` and ``S0'' = -alpha sech^2(...)``.
    """

    alpha: float
    beta: float
    slope_bound = 1.0

    def value(self, x):
        z = self.alpha * np.asarray(x, dtype=float) - self.beta
        # log cosh z = |z| + log1p(exp(-2|z|)) - log 2, stable for large |z|
        az = np.abs(z)
        return -(az + np.log1p(np.exp(-2.0 * az)) - np.log(2.0)) / self.alpha

    def d1(self, x):
        return -np.tanh(self.alpha * np.asarray(x, dtype=float) - self.beta)

    def d2(self, x):
        z = self.alpha * np.asarray(x, dtype=float) - self.beta
        return -self.alpha / np.cosh(z) ** 2


@dataclass(frozen=True, eq=False)
class TablePhase:
    """Phase tabulated at increasing abscissae, interpolated by a cubic spline."""

    x: np.ndarray
    values: np.ndarray
    spline: CubicSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "spline", CubicSpline(self.x, self.values))

    @property
    def slope_bound(self):
        return float(np.max(np.abs(self.spline(self.x, 1))))

    def value(self, x):
        return self.spline(x)

    def d1(self, x):
        return self.spline(x, 1)

    def d2(self, x):
        return self.spline(x, 2)


# -- amplitudes -------------------------------------------------------------


@dataclass(frozen=True)
class GaussianAmplitude:
    """``a0(x) = exp(-c (x - center)**2)``."""

    center: float = 0.0
    c: float = 1.0

    def value(self, x):
        return np.exp(-self.c * (np.asarray(x, dtype=float) - self.center) ** 2)

    def d1(self, x):
        z = np.asarray(x, dtype=float) - self.center
        return -2.0 * self.c * z * np.exp(-self.c * z**2)

    def support(self, rel=1e-3):
        """Interval where ``a0 >= rel * max a0``."""
        half = np.sqrt(-np.log(rel) / self.c)
        return self.center - half, self.center + half


@dataclass(frozen=True)
class FunctionAmplitude:
    """Arbitrary amplitude given as callables (derivative optional)."""

    fn: Callable
    dfn: Optional[Callable] = None
    interval: Optional[tuple] = None

    def value(self, x):
        return self.fn(np.asarray(x, dtype=float))

    def d1(self, x):
        if self.dfn is None:
            raise NotImplementedError("no derivative supplied for this amplitude")
        return self.dfn(np.asarray(x, dtype=float))

    def support(self, rel=1e-3):
        if self.interval is not None:
            return self.interval
        raise ValueError("support interval unknown for this amplitude")


@dataclass(frozen=True, eq=False)
class TableAmplitude:
    x: np.ndarray
    values: np.ndarray
    spline: CubicSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "spline", CubicSpline(self.x, self.values))

    def value(self, x):
        return self.spline(x)

    def d1(self, x):
        return self.spline(x, 1)

    def support(self, rel=1e-3):
        mag = np.abs(self.values)
        keep = np.nonzero(mag >= rel * mag.max())[0]
        return float(self.x[keep[0]]), float(self.x[keep[-1]])


# -- potentials -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Potential:
    """Real potential: ``zero``, ``harmonic`` or ``tabulated``.

    ``harmonic`` means ``V(x) = (omega**2 / 2) (x - center)**2``. A tabulated
    potential holds samples on a grid; off-grid values and the gradient come
    from its trigonometric interpolant.
    """

    kind: str = "zero"
    center: float = 0.0
    omega: float = 1.0
    grid: Optional[Grid] = None
    samples: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in ("zero", "harmonic", "tabulated"):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == "tabulated":
            if self.grid is None or self.samples is None:
                raise ValueError("tabulated potential needs a grid and samples")
            samples = np.asarray(self.samples, dtype=float)
            if samples.shape != (self.grid.n,):
                raise ValueError("tabulated samples must match the grid")
            coeffs = np.fft.fft(samples) / self.grid.n
            object.__setattr__(self, "samples", samples)
            object.__setattr__(self, "_coeffs", coeffs)
            object.__setattr__(
                self, "_dcoeffs", derivative_coeffs(self.grid, coeffs)
            )

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def harmonic(cls, center=0.0, omega=1.0):
        return cls("harmonic", center=float(center), omega=float(omega))

    @classmethod
    def tabulated(cls, grid, samples):
        return cls("tabulated", grid=grid, samples=samples)

    @property
    def is_zero(self):
        return self.kind == "zero"

    def value(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "harmonic":
            return 0.5 * self.omega**2 * (x - self.center) ** 2
        return np.real(eval_series(self.grid, self._coeffs, x))

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "harmonic":
            return self.omega**2 * (x - self.center)
        return np.real(eval_series(self.grid, self._dcoeffs, x))

    def on_grid(self, grid):
        if self.kind == "tabulated" and grid == self.grid:
            return self.samples
        return self.value(grid.nodes)
