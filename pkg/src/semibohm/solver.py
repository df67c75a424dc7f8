"""Strang-split spectral solver for the semiclassical Schroedinger equation.

Solves ``i eps d_t psi = -(eps^2/2) d_xx psi + V psi`` on a periodic grid.
One step is half a kinetic step, a full potential step, and another half
kinetic step, so with ``V = 0`` the scheme is the exact free propagator.
"""
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NumericalAbort
from .profiles import GaussianAmplitude, Potential, ZeroPhase
from .spectral import Field, derivative_coeffs, is_resolved, riemann

#: Relative density floor used wherever a density sits in a denominator.
RHO_FLOOR = 1e-28


def density_floor(rho):
    return RHO_FLOOR * float(np.max(rho))


@dataclass(frozen=True)
class SolverConfig:
    epsilon: float
    dt: float
    steps: int
    snapshot_stride: int = 1

    def __post_init__(self):
        if not (0.0 < self.epsilon <= 1.0):
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if not self.dt > 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.steps < 0 or int(self.steps) != self.steps:
            raise ValueError(f"steps must be a non-negative integer, got {self.steps}")
        if self.snapshot_stride < 1:
            raise ValueError("snapshot_stride must be >= 1")


@dataclass(frozen=True)
class WkbInitialData:
    """Initial datum ``a0(x) exp(i S0(x) / eps)``.

    With ``wavepacket=True`` the datum is the semiclassical wave packet
    ``eps**(-1/4) a0((x - x0) / sqrt(eps)) exp(i S0(x - x0) / eps)``
    centred at ``packet_center``.
    """

    amplitude: object = GaussianAmplitude()
    phase: object = ZeroPhase()
    wavepacket: bool = False
    packet_center: float = 0.0

    def samples(self, x, epsilon):
        x = np.asarray(x, dtype=float)
        if self.wavepacket:
            z = x - self.packet_center
            a = epsilon ** -0.25 * self.amplitude.value(z / np.sqrt(epsilon))
            return a * np.exp(1j * self.phase.value(z) / epsilon)
        return self.amplitude.value(x) * np.exp(1j * self.phase.value(x) / epsilon)


def init_state(grid, data, epsilon):
    """Sample the initial datum on ``grid``; warn if the grid cannot resolve it."""
    f = Field(grid, data.samples(grid.nodes, epsilon), 0.0)
    if not is_resolved(f):
        warnings.warn(
            "initial datum is under-resolved: Fourier tail above 1e-12 of peak; "
            "increase the number of modes",
            RuntimeWarning,
            stacklevel=2,
        )
    return f


def _kinetic_phase(grid, epsilon, dt):
    return np.exp(-0.5j * epsilon * grid.wavenumbers**2 * dt)


def kinetic_substep(f, epsilon, dt):
    """Exact free flow over ``dt``, diagonal in Fourier space."""
    c = np.fft.fft(f.values) * _kinetic_phase(f.grid, epsilon, dt)
    return Field(f.grid, np.fft.ifft(c), f.time + dt)


def potential_substep(f, V, epsilon, dt):
    phase = np.exp(-1j * V.on_grid(f.grid) * dt / epsilon)
    return Field(f.grid, f.values * phase, f.time + dt)


class _Stepper:
    """Precomputed phase factors for repeated Strang steps of one size."""

    def __init__(self, grid, V, epsilon, dt):
        self.free = V.is_zero
        self.half_kin = _kinetic_phase(grid, epsilon, 0.5 * dt)
        self.full_kin = _kinetic_phase(grid, epsilon, dt)
        if not self.free:
            self.pot = np.exp(-1j * V.on_grid(grid) * dt / epsilon)

    def step(self, values):
        if self.free:
            return np.fft.ifft(np.fft.fft(values) * self.full_kin)
        u = np.fft.ifft(np.fft.fft(values) * self.half_kin) * self.pot
        return np.fft.ifft(np.fft.fft(u) * self.half_kin)


def strang_step(f, V, epsilon, dt):
    """One second-order Strang step: kinetic dt/2, potential dt, kinetic dt/2."""
    if dt == 0:
        return f
    vals = _Stepper(f.grid, V, epsilon, dt).step(f.values)
    return Field(f.grid, vals, f.time + dt)


def evolve(f, V, cfg):
    """Advance ``f`` by ``cfg.steps`` Strang steps.

    Returns the list of snapshots taken every ``cfg.snapshot_stride`` steps,
    starting with ``f`` itself. The final state is always included.

    Raises
    ------
    NumericalAbort
        If the field stops being finite.
    """
    stepper = _Stepper(f.grid, V, cfg.epsilon, cfg.dt)
    snaps = [f]
    vals = f.values
    for i in range(1, cfg.steps + 1):
        vals = stepper.step(vals)
        if i % cfg.snapshot_stride == 0 or i == cfg.steps:
            if not np.all(np.isfinite(vals)):
                raise NumericalAbort(f"non-finite field after step {i}")
            snaps.append(Field(f.grid, vals, f.time + i * cfg.dt))
    return snaps


# -- observables -------------------------------------------------------------


def mass(f):
    return riemann(f.grid, f.density)


def _dpsi(f):
    c = np.fft.fft(f.values)
    return np.fft.ifft(derivative_coeffs(f.grid, c))


def kinetic_energy(f, epsilon):
    return 0.5 * epsilon**2 * riemann(f.grid, np.abs(_dpsi(f)) ** 2)


def energy(f, V, epsilon):
    """Total energy ``(eps^2/2) int |psi'|^2 + int V |psi|^2``."""
    return kinetic_energy(f, epsilon) + riemann(f.grid, V.on_grid(f.grid) * f.density)


def kinetic_split(f, epsilon):
    """Split the kinetic energy into transport and quantum parts.

    Returns ``(1/2) int rho u^2`` and ``(eps^2/2) int |d_x sqrt(rho)|^2``.
    Both integrands are formed pointwise from ``conj(psi) psi'``, which avoids
    differentiating ``sqrt(rho)`` across nodes. Nodes with ``rho`` under the
    floor are skipped.
    """
    rho = f.density
    floor = density_floor(rho)
    keep = rho > floor
    cross = np.conj(f.values) * _dpsi(f)
    denom = rho[keep] + floor
    transport = 0.5 * epsilon**2 * riemann(f.grid, cross.imag[keep] ** 2 / denom)
    quantum = 0.5 * epsilon**2 * riemann(f.grid, cross.real[keep] ** 2 / denom)
    return transport, quantum


def bohm_potential(f, epsilon):
    """Bohm potential ``-eps^2 / (2 sqrt(rho)) d_xx sqrt(rho)`` on the nodes.

    Returns a real array; nodes where ``rho`` is under the floor carry ``nan``
    (a :class:`Field` cannot hold missing values).
    """
    rho = f.density
    floor = density_floor(rho)
    keep = rho > floor
    if not np.any(keep):
        raise ValueError("density is under the floor at every node")
    amp = np.sqrt(rho)
    c = np.fft.fft(amp)
    d2 = derivative_coeffs(f.grid, derivative_coeffs(f.grid, c))
    lap = np.real(np.fft.ifft(d2))
    out = np.full(f.grid.n, np.nan)
    out[keep] = -0.5 * epsilon**2 * lap[keep] / amp[keep]
    return out
