"""Bohmian trajectories driven by the spectral solver.

Trajectories follow ``X' = u(t, X)`` with ``u = eps Im(psi'/psi)``. Each RK4
step needs the field at ``t``, ``t + dt/2`` and ``t + dt``. For ``V = 0``
those come from the exact free propagator; otherwise from two Strang
half-steps. Either way each stage field is built once and then evaluated at
all trajectory positions by direct Fourier summation.
"""
import numpy as np

from .errors import NumericalAbort
from .solver import RHO_FLOOR, _Stepper, _kinetic_phase, density_floor
from .spectral import Field, derivative_coeffs, eval_series, riemann
from .trajectories import TrajectoryBundle


def _velocity_and_density(grid, coeffs, x, epsilon, floor):
    psi, dpsi = eval_series(grid, np.stack([coeffs, derivative_coeffs(grid, coeffs)]), x)
    rho = np.abs(psi) ** 2
    return epsilon * np.imag(dpsi * np.conj(psi)) / (rho + floor), rho


def _velocity_from_coeffs(grid, coeffs, x, epsilon, floor):
    return _velocity_and_density(grid, coeffs, x, epsilon, floor)[0]


def velocity_at(f, epsilon, x):
    """Quantum velocity ``eps Im(psi'/psi)`` at arbitrary points.

    A density floor of ``1e-28 max rho`` keeps the quotient finite at nodes.
    """
    coeffs = np.fft.fft(f.values) / f.grid.n
    u = _velocity_from_coeffs(f.grid, coeffs, x, epsilon, density_floor(f.density))
    return float(u) if np.ndim(x) == 0 else u


class _StageFields:
    """Fourier coefficients of the field at the RK4 stage times.

    ``advance`` moves from ``t`` to ``t + dt`` and exposes the coefficient
    sets (``now``, ``half``, ``full``) together with their density floors.
    """

    def __init__(self, f0, V, epsilon, dt):
        self.grid = f0.grid
        self.free = V.is_zero
        self.n = f0.grid.n
        if self.free:
            self.kick = _kinetic_phase(f0.grid, epsilon, 0.5 * dt)
        else:
            self.stepper = _Stepper(f0.grid, V, epsilon, 0.5 * dt)
        self.values = np.asarray(f0.values)
        self.coeffs = np.fft.fft(self.values) / self.n
        self.floor = density_floor(np.abs(self.values) ** 2)

    def _from_coeffs(self, c):
        vals = np.fft.ifft(c) * self.n
        return vals, c, density_floor(np.abs(vals) ** 2)

    def _from_values(self, vals):
        return vals, np.fft.fft(vals) / self.n, density_floor(np.abs(vals) ** 2)

    def advance(self):
        if self.free:
            half = self._from_coeffs(self.coeffs * self.kick)
            full = self._from_coeffs(half[1] * self.kick)
        else:
            half = self._from_values(self.stepper.step(self.values))
            full = self._from_values(self.stepper.step(half[0]))
        return half, full

    def commit(self, full):
        self.values, self.coeffs, self.floor = full


def _rk4_positions(stage, x, epsilon, dt, half, full):
    g = stage.grid
    k1, rho1 = _velocity_and_density(g, stage.coeffs, x, epsilon, stage.floor)
    k2 = _velocity_from_coeffs(g, half[1], x + 0.5 * dt * k1, epsilon, half[2])
    k3 = _velocity_from_coeffs(g, half[1], x + 0.5 * dt * k2, epsilon, half[2])
    k4 = _velocity_from_coeffs(g, full[1], x + dt * k3, epsilon, full[2])
    # rho relative to the grid maximum (the floor is RHO_FLOOR times that maximum)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), k1, rho1 * (RHO_FLOOR / stage.floor)


def _check_finite(x, step):
    bad = np.nonzero(~np.isfinite(x))[0]
    if bad.size:
        raise NumericalAbort(
            f"trajectory for seed index {int(bad[0])} became non-finite at step {step}"
        )


def advance_trajectories(x, f_t, V, epsilon, dt):
    """One RK4 step for every position in ``x`` starting from the field ``f_t``.

    Returns the new positions and the field at ``t + dt``.
    """
    stage = _StageFields(f_t, V, epsilon, dt)
    half, full = stage.advance()
    x_new, _, _ = _rk4_positions(stage, np.asarray(x, dtype=float), epsilon, dt, half, full)
    _check_finite(x_new, 1)
    return x_new, Field(f_t.grid, full[0], f_t.time + dt)


def co_evolve(f0, V, epsilon, dt, steps, seeds, snapshot_stride=1, keep_fields=True):
    """Evolve field and Bohmian trajectories together.

    Parameters
    ----------
    f0 : Field
        Initial field.
    seeds : array_like
        Starting positions, increasing.
    snapshot_stride : int
        Record every this many steps (the final step is always recorded).

    Returns
    -------
    bundle : TrajectoryBundle
        Positions and momenta ``P = u(t, X)`` at the snapshot times. Its
        ``min_density`` holds, per trajectory, the smallest relative density
        ``rho(X) / max rho`` met at any step divided by the relative density
        at the seed, so a value far below one means the path ran into a node.
    fields : list of Field
        Field snapshots at the same times (empty if ``keep_fields`` is false).
    """
    seeds = np.asarray(seeds, dtype=float)
    stage = _StageFields(f0, V, epsilon, dt)
    x = seeds.copy()
    times, xs, ps, fields = [], [], [], []
    low = np.full(seeds.size, np.inf)
    _, rho0 = _velocity_and_density(stage.grid, stage.coeffs, x, epsilon, stage.floor)
    start = rho0 * (RHO_FLOOR / stage.floor)

    def record(t, p):
        times.append(t)
        xs.append(x.copy())
        ps.append(p)
        if keep_fields:
            fields.append(Field(f0.grid, stage.values, t))

    for i in range(1, steps + 1):
        half, full = stage.advance()
        x_new, k1, rel = _rk4_positions(stage, x, epsilon, dt, half, full)
        np.minimum(low, rel, out=low)
        if (i - 1) % snapshot_stride == 0:
            record(f0.time + (i - 1) * dt, k1)
        _check_finite(x_new, i)
        x = x_new
        stage.commit(full)
    p, rho = _velocity_and_density(stage.grid, stage.coeffs, x, epsilon, stage.floor)
    np.minimum(low, rho * (RHO_FLOOR / stage.floor), out=low)
    record(f0.time + steps * dt, p)
    bundle = TrajectoryBundle(
        seeds, np.array(times), np.array(xs).T, np.array(ps).T, epsilon=epsilon,
        min_density=low / np.maximum(start, np.finfo(float).tiny),
    )
    return bundle, fields


def run_bohmian(scenario, seeds):
    """Bohmian bundle for a resolved scenario (see :mod:`semibohm.scenarios`)."""
    seeds = getattr(seeds, "seeds", seeds)
    bundle, _ = co_evolve(
        scenario.initial_field(),
        scenario.potential,
        scenario.epsilon,
        scenario.dt,
        scenario.steps,
        seeds,
        scenario.snapshot_stride,
        keep_fields=False,
    )
    return bundle


# -- audits ------------------------------------------------------------------


def pushforward_check(bundle, f_t, sigma, seedset):
    """Both sides of ``int sigma rho(t) dx = int sigma(X(t, y)) rho0(y) dy``.

    The left side is grid quadrature of the field, the right side trapezoid
    quadrature over the seeds of ``seedset`` (which must match the bundle).
    """
    if not np.allclose(seedset.seeds, bundle.seeds):
        raise ValueError("seed set does not match the bundle")
    j = bundle.at_time(f_t.time)
    if abs(bundle.times[j] - f_t.time) > 1e-9 * max(1.0, abs(f_t.time)):
        raise ValueError(f"bundle has no snapshot at t={f_t.time}")
    lhs = riemann(f_t.grid, sigma(f_t.grid.nodes) * f_t.density)
    rhs = float(np.sum(sigma(bundle.x[:, j]) * seedset.quadrature_weights()))
    return lhs, rhs


def non_crossing_audit(bundle, slack=1e-9):
    """Check that trajectory rows stay ordered at every snapshot.

    Returns
    -------
    ok : bool
    violation : tuple or None
        ``(time_index, row_index)`` of the first pair found out of order,
        where rows ``row_index`` and ``row_index + 1`` have swapped.
    """
    if bundle.x.shape[0] < 2:
        return True, None
    gaps = np.diff(bundle.x, axis=0)
    bad = gaps < -slack
    if not bad.any():
        return True, None
    cols = np.nonzero(bad.any(axis=0))[0]
    j = int(cols[0])
    i = int(np.nonzero(bad[:, j])[0][0])
    return False, (j, i)


def deviation_measure(bohmian, classical, delta, t_window):
    """Fraction of (time, seed) lattice points where ``|(X, P)_eps - (X, P)| >= delta``.

    Only snapshot times inside the closed ``t_window`` count.
    """
    if bohmian.x.shape != classical.x.shape or not np.allclose(
        bohmian.seeds, classical.seeds
    ) or not np.allclose(bohmian.times, classical.times):
        raise ValueError("bundles must share seeds and snapshot times")
    t0, t1 = t_window
    cols = (bohmian.times >= t0 - 1e-12) & (bohmian.times <= t1 + 1e-12)
    if not cols.any():
        raise ValueError("no snapshot times inside the window")
    dist = np.hypot(
        bohmian.x[:, cols] - classical.x[:, cols], bohmian.p[:, cols] - classical.p[:, cols]
    )
    return float(np.mean(dist >= delta))


def max_trajectory_difference(a, b):
    """Max-norm distance between two bundles at their common snapshot times."""
    common, ia, ib = np.intersect1d(
        np.round(a.times, 12), np.round(b.times, 12), return_indices=True
    )
    if common.size == 0:
        raise ValueError("bundles share no snapshot times")
    return float(np.max(np.abs(a.x[:, ia] - b.x[:, ib])))
