"""Free-case stationary phase, limiting phase-space measures, Wigner transform.

For ``V = 0`` the solution at ``(t, x)`` is, up to ``O(eps)``, a sum over the
rays ``y_j`` reaching ``x``::

    psi ~ sum_j a0(y_j) / sqrt|1 + t S0''(y_j)| * exp(-i pi m_j / 2) * exp(i S_j / eps)

where ``S_j = S0(y_j) + (t/2) S0'(y_j)^2`` and ``m_j`` is 1 on rays whose
Jacobian has turned negative. The ``-pi/2`` shift already folds in the
``(2 pi i eps t)^(-1/2)`` prefactor of the exact free propagator, so
branches that never crossed a caustic carry no extra phase.
"""
from dataclasses import dataclass, field
from typing import List

import numpy as np
from scipy.optimize import brentq
from scipy.stats import qmc

from .errors import CausticError

ROOT_TOL = 1e-12
DEGENERATE_SLOPE = 1e-8


@dataclass(frozen=True)
class Branch:
    y: float
    s: float
    amp: complex
    m_minus: int
    grad_s: float


@dataclass(frozen=True)
class BranchSet:
    t: float
    x: float
    branches: List[Branch] = field(default_factory=list)

    def __len__(self):
        return len(self.branches)

    @property
    def b(self):
        """Branch amplitudes including their Maslov phase."""
        return np.array([br.amp * phase_correction(br.m_minus) for br in self.branches])

    @property
    def grad_s(self):
        return np.array([br.grad_s for br in self.branches])


def phase_correction(m_minus):
    return np.exp(-0.5j * np.pi * m_minus)


def _default_window(t, x, S0):
    bound = getattr(S0, "slope_bound", np.inf)
    if np.isfinite(bound):
        reach = t * bound + 1e-3
    else:
        reach = 10.0 * (1.0 + abs(x))
    return x - reach, x + reach


def stationary_points(t, x, S0, y_window=None, samples=4096):
    """All roots of ``g(y) = y + t S0'(y) - x`` in the seed window.

    A dense sign scan brackets the roots, which are then refined by Brent's
    method and a Newton polish.

    Raises
    ------
    CausticError
        If a root is degenerate (``|g'| < 1e-8``), i.e. ``(t, x)`` sits on
        the caustic set.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return [float(x)]
    lo, hi = y_window if y_window is not None else _default_window(t, x, S0)
    g = lambda y: y + t * S0.d1(y) - x
    dg = lambda y: 1.0 + t * S0.d2(y)
    ys = np.linspace(lo, hi, samples)
    vals = g(ys)
    roots = []
    for i in range(samples - 1):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            roots.append(ys[i])
        elif a * b < 0:
            roots.append(brentq(g, ys[i], ys[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps))
    if vals[-1] == 0.0:
        roots.append(ys[-1])
    out = []
    for y in roots:
        slope = float(dg(y))
        if abs(slope) < DEGENERATE_SLOPE:
            raise CausticError(f"degenerate stationary point at y={y:.6g} (t={t}, x={x})")
        for _ in range(2):
            r = float(g(y))
            if r == 0.0:
                break
            y = y - r / float(dg(y))
        if abs(float(g(y))) > ROOT_TOL:
            raise CausticError(f"stationary point residual {abs(float(g(y))):.3g} too large")
        out.append(float(y))
    return out


def branch_set(t, x, a0, S0, y_window=None, samples=4096):
    """Stationary points at ``(t, x)`` with their phases, amplitudes and Maslov counts."""
    ys = stationary_points(t, x, S0, y_window, samples)
    branches = []
    for y in ys:
        jac = float(1.0 + t * S0.d2(y))
        p = float(S0.d1(y))
        branches.append(
            Branch(
                y=y,
                s=float(S0.value(y)) + 0.5 * t * p**2,
                amp=complex(a0.value(y) / np.sqrt(abs(jac))),
                m_minus=1 if jac < 0 else 0,
                grad_s=p,
            )
        )
    grads = np.array([br.grad_s for br in branches])
    if grads.size > 1 and np.min(np.diff(np.sort(grads))) == 0.0:
        raise CausticError("two branches share the same momentum")
    return BranchSet(float(t), float(x), branches)


def multiphase_eval(bs, epsilon, corrections=None):
    """Multi-phase WKB value ``sum_j amp_j c_j exp(i S_j / eps)``.

    ``corrections`` overrides the per-branch phase factors ``c_j``; by
    default ``c_j = exp(-i pi m_j / 2)``.
    """
    total = 0j
    for j, br in enumerate(bs.branches):
        c = phase_correction(br.m_minus) if corrections is None else corrections[j]
        total += br.amp * c * np.exp(1j * br.s / epsilon)
    return complex(total)


def oscillatory_integral_oracle(
    t, x, epsilon, a0, S0, y_window=None, points_per_period=40, max_points=4_000_000
):
    """Free solution by direct quadrature of its oscillatory integral.

    Evaluates ``(2 pi i eps t)^(-1/2) int a0(y) exp(i Phi / eps) dy`` with
    ``Phi = S0(y) + (x - y)^2 / (2t)`` by the composite trapezoid rule. The
    step resolves the fastest local oscillation with ``points_per_period``
    samples.

    Raises
    ------
    ValueError
        If ``max_points`` would leave fewer than 10 points per period.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    lo, hi = y_window if y_window is not None else a0.support(1e-17)
    width = hi - lo
    probe = np.linspace(lo, hi, 4097)
    freq = np.max(np.abs(S0.d1(probe) + (probe - x) / t)) / epsilon
    period = 2.0 * np.pi / max(freq, 1e-300)
    npts = int(np.ceil(width / period * points_per_period)) + 1
    if npts > max_points:
        if (max_points - 1) * period / width < 10:
            raise ValueError("quadrature would resolve fewer than 10 points per period")
        npts = max_points
    npts = max(npts, 2049)
    y = np.linspace(lo, hi, npts)
    phi = S0.value(y) + (x - y) ** 2 / (2.0 * t)
    integrand = a0.value(y) * np.exp(1j * phi / epsilon)
    h = y[1] - y[0]
    integral = h * (np.sum(integrand) - 0.5 * (integrand[0] + integrand[-1]))
    return complex(integral / np.sqrt(2j * np.pi * epsilon * t))


# -- limiting measures ---------------------------------------------------------


@dataclass(frozen=True)
class MomentumHistogram:
    """Histogram of a momentum measure.

    ``centroids`` holds the mass-weighted mean momentum inside each bin
    (the geometric midpoint for empty bins); moments are taken at these.
    """

    bin_edges: np.ndarray
    masses: np.ndarray
    total_mass: float
    centroids: np.ndarray

    @property
    def midpoints(self):
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    def is_concentrated(self, fraction=0.99, width=2):
        """True if ``fraction`` of the mass sits in ``width`` adjacent bins."""
        if self.total_mass <= 0:
            return False
        window = np.convolve(self.masses, np.ones(width), mode="valid")
        return bool(window.max() >= fraction * self.total_mass)


def _torus_samples(n_phases, samples, seed):
    sampler = qmc.Halton(d=n_phases, scramble=True, seed=seed)
    return 2.0 * np.pi * sampler.random(samples)


def torus_measure(b, grad_s, samples=10**6, bins=512, p_range=None, seed=0, chunk=2**17):
    """Momentum histogram of the limiting Bohmian measure for amplitudes ``b``.

    Samples ``theta`` on the torus and drops, with weight
    ``Gamma = |sum_j b_j e^{i theta_j}|^2 / samples``, a mass at
    ``v = sum_j grad_j Re(b_j e^{i theta_j} conj(Z)) / Gamma``.
    Momenta outside ``p_range`` are booked into the edge bins.
    """
    b = np.asarray(b, dtype=complex)
    grad_s = np.asarray(grad_s, dtype=float)
    if p_range is None:
        p_range = (grad_s.min() - 1.0, grad_s.max() + 1.0)
    edges = np.linspace(p_range[0], p_range[1], bins + 1)
    masses = np.zeros(bins)
    first = np.zeros(bins)
    cutoff = 1e-12 * np.sum(np.abs(b)) ** 2
    theta = _torus_samples(b.size, samples, seed)
    for start in range(0, samples, chunk):
        th = theta[start:start + chunk]
        terms = b[None, :] * np.exp(1j * th)
        z = terms.sum(axis=1)
        gamma = np.abs(z) ** 2
        keep = gamma >= cutoff
        num = (np.real(terms[keep] * np.conj(z[keep])[:, None]) * grad_s[None, :]).sum(axis=1)
        v = num / gamma[keep]
        w = gamma[keep] / samples
        idx = np.clip(np.searchsorted(edges, v, side="right") - 1, 0, bins - 1)
        masses += np.bincount(idx, weights=w, minlength=bins)
        first += np.bincount(idx, weights=w * v, minlength=bins)
    mid = 0.5 * (edges[1:] + edges[:-1])
    centroids = np.where(masses > 0, first / np.where(masses > 0, masses, 1.0), mid)
    return MomentumHistogram(edges, masses, float(masses.sum()), centroids)


def limiting_bohmian_measure(bs, samples=10**6, bins=512, seed=0):
    """Limiting Bohmian momentum distribution at the point of a branch set."""
    if len(bs) == 0:
        raise ValueError("empty branch set")
    grads = bs.grad_s
    if grads.size > 1 and np.min(np.diff(np.sort(grads))) == 0.0:
        raise ValueError("branch momenta must be pairwise distinct")
    return torus_measure(bs.b, grads, samples=samples, bins=bins, seed=seed)


def limiting_wigner_measure(bs):
    """Atoms ``(grad S_j, |amp_j|^2)``; Maslov phases play no role."""
    return [(br.grad_s, abs(br.amp) ** 2) for br in bs.branches]


def measure_moments(h, order):
    """``order``-th momentum moment of a histogram or an atom list."""
    if isinstance(h, MomentumHistogram):
        return float(np.sum(h.masses * h.centroids**order))
    return float(sum(mass * p**order for p, mass in h))


# -- numerical Wigner transform --------------------------------------------------


@dataclass(frozen=True)
class WignerGrid:
    """Wigner transform samples ``values[i, m]`` at ``(x[i], p[m])``."""

    x: np.ndarray
    p: np.ndarray
    values: np.ndarray
    imag_ratio: float

    @property
    def dp(self):
        return self.p[1] - self.p[0]

    def x_marginal(self):
        return self.values.sum(axis=1) * self.dp


def _half_node_values(f):
    grid = f.grid
    c = np.fft.fft(f.values)
    c[grid.nyquist_index] = 0.0
    nodes = np.fft.ifft(c)
    halves = np.fft.ifft(c * np.exp(0.5j * grid.wavenumbers * grid.dx))
    fine = np.empty(2 * grid.n, dtype=complex)
    fine[0::2] = nodes
    fine[1::2] = halves
    return fine


def wigner_transform_numeric(f, epsilon, x_stride=1):
    """eps-scaled Wigner transform of a field on its own grid.

    For each node ``x_j`` (every ``x_stride``-th) the correlation
    ``psi(x - s/2) conj(psi(x + s/2))`` is sampled at ``s = l dx`` and
    transformed in ``s``. Half-node values come from the trigonometric
    interpolant (a spectral half-cell shift), so the output grid is
    ``p_m = eps k_m``. The unpaired shift ``l = -n/2`` is dropped, which makes
    the transform exactly real; ``imag_ratio`` reports the residual
    imaginary part relative to the maximum.
    """
    grid = f.grid
    n = grid.n
    fine = _half_node_values(f)
    rows = np.arange(0, n, x_stride)
    shifts = np.fft.ifftshift(np.arange(-n // 2, n // 2))  # FFT order in l
    minus = fine[np.mod(2 * rows[:, None] - shifts[None, :], 2 * n)]
    plus = fine[np.mod(2 * rows[:, None] + shifts[None, :], 2 * n)]
    corr = minus * np.conj(plus)
    corr[:, n // 2] = 0.0
    spec = np.fft.ifft(corr, axis=1) * n
    spec *= grid.dx / (2.0 * np.pi * epsilon)
    spec = np.fft.fftshift(spec, axes=1)
    p = epsilon * np.fft.fftshift(grid.wavenumbers)
    peak = np.max(np.abs(spec.real))
    ratio = float(np.max(np.abs(spec.imag)) / peak) if peak > 0 else 0.0
    return WignerGrid(grid.nodes[rows], p, spec.real, ratio)
