"""Periodic Fourier representation of 1D fields.

A :class:`Grid` fixes the periodic box ``[x0, x0 + L)`` and its ``n`` nodes.
Fields are sampled on the nodes; spectra hold the coefficients ``c_m`` of
the truncated series

    f(x) = sum_m c_m exp(i k_m (x - x0)),   k_m = 2 pi m / L,

with ``m = -n/2, ..., n/2 - 1`` stored in FFT order.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalAbort

#: Relative coefficient tail below which a field counts as resolved.
RESOLUTION_TOL = 1e-12


def _is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid with its Fourier wavenumbers.

    Use :func:`make_grid` to construct one; it validates the arguments.
    """

    x0: float
    length: float
    n: int
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    wavenumbers: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        nodes = self.x0 + self.length * np.arange(self.n) / self.n
        k = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.length / self.n)
        nodes.flags.writeable = False
        k.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "wavenumbers", k)

    @property
    def dx(self):
        return self.length / self.n

    @property
    def nyquist_index(self):
        """Position of the unpaired mode ``m = -n/2`` in FFT order."""
        return self.n // 2

    def wrap(self, x):
        """Map ``x`` periodically into ``[x0, x0 + L)``."""
        return self.x0 + np.mod(np.asarray(x, dtype=float) - self.x0, self.length)


def make_grid(x0, length, n):
    """Build a periodic grid on ``[x0, x0 + length)`` with ``n`` nodes.

    Raises
    ------
    ValueError
        If ``length <= 0`` or ``n`` is not a power of two with ``n >= 8``.
    """
    if not np.isfinite(length) or length <= 0:
        raise ValueError(f"grid length must be positive, got {length}")
    if int(n) != n or not _is_power_of_two(int(n)) or n < 8:
        raise ValueError(f"number of nodes must be a power of two >= 8, got {n}")
    return Grid(float(x0), float(length), int(n))


@dataclass(frozen=True)
class Field:
    """Complex samples of a wavefunction on ``grid`` at simulation time ``time``."""

    grid: Grid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        if values.shape != (self.grid.n,):
            raise ValueError(
                f"field needs {self.grid.n} samples, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise NumericalAbort("field contains non-finite samples")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def density(self):
        return np.abs(self.values) ** 2


@dataclass(frozen=True)
class Spectrum:
    """Fourier coefficients of a field, FFT-ordered (see module docstring)."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=complex)
        if coeffs.shape != (self.grid.n,):
            raise ValueError(
                f"spectrum needs {self.grid.n} coefficients, got shape {coeffs.shape}"
            )
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)


def to_spectrum(f):
    return Spectrum(f.grid, np.fft.fft(f.values) / f.grid.n)


def from_spectrum(s, time=0.0):
    return Field(s.grid, np.fft.ifft(s.coeffs) * s.grid.n, time)


def derivative_coeffs(grid, coeffs):
    """Multiply by ``i k`` with the Nyquist mode removed."""
    out = 1j * grid.wavenumbers * coeffs
    out[..., grid.nyquist_index] = 0.0
    return out


def spectral_derivative(f):
    """First derivative of ``f`` computed in Fourier space."""
    c = np.fft.fft(f.values)
    return Field(f.grid, np.fft.ifft(derivative_coeffs(f.grid, c)), f.time)


def _factor(n):
    # n = n_outer * n_inner with both powers of two
    n_inner = 1 << (int(np.log2(n)) // 2)
    return n // n_inner, n_inner


def eval_series(grid, coeffs, x):
    """Evaluate one or more truncated Fourier series at arbitrary points.

    Parameters
    ----------
    grid : Grid
    coeffs : ndarray, shape (n,) or (r, n)
        FFT-ordered coefficients; each row is a separate series.
    x : array_like
        Evaluation points, wrapped periodically into the box.

    Returns
    -------
    ndarray
        Shape ``x.shape`` for one series, ``(r,) + x.shape`` for ``r`` rows.

    Notes
    -----
    Direct summation over all ``n`` modes, with the Nyquist mode dropped.
    Writing ``j = a * n_in + b`` splits ``exp(i j theta)`` into two short
    power tables, so the ``n``-term sum per point costs one small matrix
    product instead of ``n`` complex exponentials.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    single = coeffs.ndim == 1
    c2 = np.atleast_2d(coeffs)
    x = np.asarray(x, dtype=float)
    shape = x.shape
    theta = 2.0 * np.pi * np.mod(x.ravel() - grid.x0, grid.length) / grid.length

    n = grid.n
    n_out, n_in = _factor(n)
    # j = m + n/2 runs over 0..n-1; slot j=0 holds the Nyquist mode
    shifted = np.fft.fftshift(c2, axes=-1)
    shifted[:, 0] = 0.0
    table = shifted.reshape(c2.shape[0], n_out, n_in)

    w = np.exp(1j * theta)
    inner = _powers(w, n_in)
    outer = _powers(inner[:, -1] * w, n_out) * np.exp(-0.5j * n * theta)[:, None]
    partial = table @ inner.T  # (r, a, p)
    vals = np.einsum("rap,pa->rp", partial, outer)
    vals = vals.reshape((c2.shape[0],) + shape)
    return vals[0] if single else vals


def _powers(w, count):
    """Columns ``w**0 .. w**(count-1)`` for unit-modulus ``w``."""
    steps = np.empty((w.size, count), dtype=complex)
    steps[:, 0] = 1.0
    steps[:, 1:] = w[:, None]
    return np.cumprod(steps, axis=1)


def eval_at(f, x):
    """Value of the trigonometric interpolant of ``f`` at ``x`` (scalar or array)."""
    coeffs = np.fft.fft(f.values) / f.grid.n
    out = eval_series(f.grid, coeffs, x)
    return complex(out) if np.ndim(x) == 0 else out


def boundary_decay(f, tol):
    """True iff the field is below ``tol * max|f|`` on the outer 1/16 of nodes."""
    mag = np.abs(f.values)
    peak = mag.max()
    if peak == 0.0:
        return True
    edge = max(1, f.grid.n // 16)
    rim = max(mag[:edge].max(), mag[-edge:].max())
    return bool(rim <= tol * peak)


def coefficient_tail(f, fraction=1.0 / 16):
    """Largest coefficient modulus in the top ``fraction`` of |k|, relative to the peak."""
    c = np.abs(np.fft.fft(f.values))
    peak = c.max()
    if peak == 0.0:
        return 0.0
    order = np.argsort(np.abs(f.grid.wavenumbers), kind="stable")
    tail = order[int(len(order) * (1.0 - fraction)):]
    return float(c[tail].max() / peak)


def is_resolved(f, tol=RESOLUTION_TOL):
    """Grid adequacy rule: the Fourier tail has decayed below ``tol``."""
    return coefficient_tail(f) <= tol


def riemann(grid, values):
    """Uniform-grid quadrature, exact for resolved trigonometric polynomials."""
    return float(np.real(np.sum(values)) * grid.dx)
