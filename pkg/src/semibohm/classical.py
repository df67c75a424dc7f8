"""Classical rays, their Jacobians, caustic onset and single-phase WKB fields.

Rays solve ``X' = P``, ``P' = -V'(X)`` from ``(y, S0'(y))``. The Jacobian
``J = dX/dy`` is carried by the variational system ``dX' = dP``,
``dP' = -V''(X) dX`` with ``(dX, dP)(0) = (1, S0''(y))``, and the action
``int (P^2/2 - V(X)) dt`` rides along on the same RK4 stages.
"""
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import CausticError, NumericalAbort
from .trajectories import TrajectoryBundle

#: Default largest RK4 step for ray integration.
RAY_DT = 1e-3


@dataclass(frozen=True)
class FlowSample:
    t: float
    y: np.ndarray
    x: np.ndarray
    p: np.ndarray
    jac: np.ndarray


@dataclass(frozen=True)
class CausticReport:
    t_star: float
    x_star: float
    y_star: float
    scanned_window: tuple

    @property
    def found(self):
        return np.isfinite(self.t_star)


def flow_free(t, y, S0):
    """Closed-form free flow ``X = y + t S0'(y)``, ``J = 1 + t S0''(y)``."""
    y = np.asarray(y, dtype=float)
    p = S0.d1(y)
    return FlowSample(t, y, y + t * p, p, 1.0 + t * S0.d2(y))


def _hessian(V, x):
    if V.kind == "zero":
        return np.zeros_like(x)
    if V.kind == "harmonic":
        return np.full_like(x, V.omega**2)
    h = 1e-5
    return (V.gradient(x + h) - V.gradient(x - h)) / (2.0 * h)


def _rhs(state, V):
    x, p, dx, dp, _ = state
    vx = V.value(x) if not V.is_zero else 0.0
    return np.stack(
        [p, -V.gradient(x), dp, -_hessian(V, x) * dx, 0.5 * p**2 - vx]
    )


def _rk4(state, V, h):
    k1 = _rhs(state, V)
    k2 = _rhs(state + 0.5 * h * k1, V)
    k3 = _rhs(state + 0.5 * h * k2, V)
    k4 = _rhs(state + h * k3, V)
    return state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _initial_state(y, S0):
    y = np.asarray(y, dtype=float)
    return np.stack([y, S0.d1(y), np.ones_like(y), S0.d2(y), S0.value(y)])


def _march(state, V, duration, dt):
    """Advance the augmented ray state by ``duration`` with steps <= ``dt``."""
    if duration == 0:
        return state
    nsteps = max(1, int(np.ceil(abs(duration) / dt - 1e-9)))
    h = duration / nsteps
    for _ in range(nsteps):
        state = _rk4(state, V, h)
    if not np.all(np.isfinite(state)):
        raise NumericalAbort("ray integration produced non-finite values")
    return state


def _integrate(t, y, S0, V, dt):
    return _march(_initial_state(y, S0), V, t, dt)


def flow_ode(t, y, S0, V, dt=RAY_DT):
    """RK4 ray flow with variational Jacobian, vectorized over seeds ``y``."""
    x, p, jac, _, _ = _integrate(t, y, S0, V, dt)
    return FlowSample(t, np.asarray(y, dtype=float), x, p, jac)


def flow(t, y, S0, V, dt=RAY_DT):
    """Closed form when ``V = 0``, RK4 otherwise."""
    if V.is_zero:
        return flow_free(t, y, S0)
    return flow_ode(t, y, S0, V, dt)


def jacobian_fd(t, y, S0, V, dy=1e-5, dt=RAY_DT):
    """Centered divided-difference ``dX/dy``; a cross-check for the variational Jacobian."""
    plus = flow_ode(t, np.asarray(y) + dy, S0, V, dt).x
    minus = flow_ode(t, np.asarray(y) - dy, S0, V, dt).x
    return (plus - minus) / (2.0 * dy)


def action(t, y, S0, V, dt=RAY_DT):
    """``S0(y) + int_0^t (P^2/2 - V(X)) ds`` along the ray from ``y``."""
    return _integrate(t, y, S0, V, dt)[4]


def classical_bundle(seeds, times, S0, V, dt=RAY_DT):
    """Rays for every seed, sampled at the increasing ``times`` (starting at 0)."""
    seeds = np.asarray(seeds, dtype=float)
    times = np.asarray(times, dtype=float)
    xs = np.empty((seeds.size, times.size))
    ps = np.empty_like(xs)
    js = np.empty_like(xs)
    if V.is_zero:
        for j, t in enumerate(times):
            fs = flow_free(t, seeds, S0)
            xs[:, j], ps[:, j], js[:, j] = fs.x, fs.p, fs.jac
    else:
        state = _initial_state(seeds, S0)
        now = 0.0
        for j, t in enumerate(times):
            state = _march(state, V, t - now, dt)
            now = t
            xs[:, j], ps[:, j], js[:, j] = state[0], state[1], state[2]
    return TrajectoryBundle(seeds, times, xs, ps, epsilon=None, jac=js)


# -- caustics ----------------------------------------------------------------


def _jac_lattice(ys, ts, S0, V, dt):
    if V.is_zero:
        return 1.0 + ts[:, None] * S0.d2(ys)[None, :]
    out = np.empty((ts.size, ys.size))
    state = _initial_state(ys, S0)
    now = 0.0
    for i, t in enumerate(ts):
        state = _march(state, V, t - now, dt)
        now = t
        out[i] = state[2]
    return out


def _jac_at(t, y, S0, V, dt):
    return float(flow(t, y, S0, V, dt).jac)


def caustic_onset(S0, V, y_window, t_window, n_y=400, n_t=400, dt=RAY_DT, tol=1e-9):
    """Locate the first time a ray Jacobian vanishes inside the window.

    The Jacobian is scanned on an ``n_t x n_y`` lattice. The first time slab
    with a non-positive entry is refined by root-finding in ``t`` and then
    minimizing the crossing time over ``y`` around the best lattice seed.

    Returns
    -------
    CausticReport
        ``t_star = inf`` (and ``nan`` locations) when no crossing is found.
    """
    y0, y1 = map(float, y_window)
    t0, t1 = map(float, t_window)
    if t0 < 0 or t1 <= t0 or y1 <= y0:
        raise ValueError("windows must be finite, increasing and start at t >= 0")
    ys = np.linspace(y0, y1, n_y)
    ts = np.linspace(t0, t1, n_t)
    J = _jac_lattice(ys, ts, S0, V, dt)
    window = ((y0, y1), (t0, t1))
    hit = np.nonzero((J <= 0).any(axis=1))[0]
    if hit.size == 0:
        return CausticReport(np.inf, np.nan, np.nan, window)
    i = int(hit[0])
    if i == 0 and t0 > 0:
        lo_t = 0.0
    else:
        lo_t = ts[max(i - 1, 0)]
    hi_t = min(t1, ts[i] + 4.0 * (ts[1] - ts[0]))

    def crossing(y):
        if V.is_zero:
            f = lambda t: float(1.0 + t * S0.d2(y))
            if f(hi_t) > 0:
                return np.inf
            return brentq(f, lo_t, hi_t, xtol=tol, rtol=4 * np.finfo(float).eps)
        # one sweep through the slab, then a root inside the first bad substep
        state = _march(_initial_state(np.array([y]), S0), V, lo_t, dt)
        nsub = max(1, int(np.ceil((hi_t - lo_t) / dt)))
        h = (hi_t - lo_t) / nsub
        now = lo_t
        if state[2, 0] <= 0:
            return lo_t
        for _ in range(nsub):
            nxt = _rk4(state, V, h)
            if nxt[2, 0] <= 0:
                base = state
                f = lambda s: float(_rk4(base, V, s)[2, 0]) if s > 0 else float(base[2, 0])
                return now + brentq(f, 0.0, h, xtol=tol, rtol=4 * np.finfo(float).eps)
            state, now = nxt, now + h
        return np.inf

    j = int(np.argmin(J[i]))
    a, b = ys[max(j - 1, 0)], ys[min(j + 1, n_y - 1)]
    res = minimize_scalar(crossing, bounds=(a, b), method="bounded",
                          options={"xatol": 1e-9})
    cands = [(crossing(ys[j]), ys[j])]
    if np.isfinite(res.fun):
        cands.append((float(res.fun), float(res.x)))
    t_star, y_star = min(cands)
    x_star = float(flow(t_star, y_star, S0, V, dt).x)
    return CausticReport(float(t_star), x_star, float(y_star), window)


# -- single-phase WKB reconstruction -------------------------------------------


def invert_flow(t, x, S0, V, dt=RAY_DT, t_star=None, tol=1e-10):
    """Seed ``y`` whose ray reaches ``x`` at time ``t`` (before caustic onset).

    Raises
    ------
    CausticError
        If ``t >= t_star`` or the ray map is not monotone at the solution.
    """
    if t_star is not None and t >= t_star:
        raise CausticError(f"t={t} is past the caustic onset {t_star}")
    if t == 0:
        return float(x)
    g = lambda y: float(flow(t, y, S0, V, dt).x) - x
    span = 1.0
    lo, hi = x - span, x + span
    while g(lo) > 0 or g(hi) < 0:
        span *= 2.0
        if span > 1e6:
            raise CausticError("could not bracket the ray reaching x")
        lo, hi = x - span, x + span
    y = brentq(g, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)
    for _ in range(3):
        fs = flow(t, y, S0, V, dt)
        if fs.jac <= 0:
            raise CausticError(f"ray Jacobian {float(fs.jac):.3g} <= 0 at t={t}")
        r = float(fs.x) - x
        if abs(r) <= 1e-15:
            break
        y -= r / float(fs.jac)
    if abs(g(y)) > tol:
        raise CausticError(f"ray inversion residual {abs(g(y)):.3g} exceeds {tol}")
    return float(y)


def _checked(t, y, S0, V, dt):
    fs = flow(t, y, S0, V, dt)
    if fs.jac <= 0:
        raise CausticError(f"caustic reached: J={float(fs.jac):.3g} at t={t}")
    return fs


def wkb_phase(t, x, S0, V, dt=RAY_DT, method="auto"):
    """Single-valued phase ``S(t, x)`` by the method of characteristics.

    ``method="closed"`` uses ``S0(Y) + (t/2) S0'(Y)^2`` (free case only);
    ``"ode"`` accumulates the action along the RK4 ray.
    """
    y = invert_flow(t, x, S0, V, dt)
    _checked(t, y, S0, V, dt)
    if method == "auto":
        method = "closed" if V.is_zero else "ode"
    if method == "closed":
        if not V.is_zero:
            raise ValueError("closed-form phase only holds for V = 0")
        return float(S0.value(y) + 0.5 * t * S0.d1(y) ** 2)
    return float(action(t, y, S0, V, dt))


def wkb_amplitude(t, x, a0, S0, V, dt=RAY_DT):
    y = invert_flow(t, x, S0, V, dt)
    fs = _checked(t, y, S0, V, dt)
    return complex(a0.value(y) / np.sqrt(fs.jac))


def wkb_density(t, x, a0, S0, V, dt=RAY_DT):
    y = invert_flow(t, x, S0, V, dt)
    fs = _checked(t, y, S0, V, dt)
    return float(np.abs(a0.value(y)) ** 2 / fs.jac)
