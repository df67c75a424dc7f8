"""Scenario catalog and flat ``key=value`` configuration.

Catalog entries (all grids periodic, defaults overridable by config or flags):

=============== ===== ================ ====== ======= ======= ======================================
name            eps   domain           modes  t_final steps   initial datum and potential
=============== ===== ================ ====== ======= ======= ======================================
vortex          1     [-10, 10]        2^9    2 pi    10^4    (2 - 2x^2) e^{-x^2/2}, V = x^2/2
wavepacket      1e-3  [-2, 3]          2^12   1       10^4    eps^{-1/4} e^{-z^2}, z = (x-1/2)/sqrt(eps)
harmonic_focus  1e-3  [-2, 3]          2^12   pi      10^4    e^{-25(x-1/2)^2}, V = (x-1/2)^2/2
free_caustic    1e-3  [-2, 3]          2^12   0.6     10^4    e^{-25(x-1/2)^2} e^{i S0/eps}, log-cosh S0
free_plane      1e-2  [-2, 3]          2^10   1       10^3    e^{-25(x-1/2)^2} e^{i x/(2 eps)}
rarefaction     1e-2  [-4, 4]          2^11   0.5     2*10^3  e^{-25x^2} e^{i x^2/eps}
=============== ===== ================ ====== ======= ======= ======================================

The domains are wide enough that every field stays below ``1e-10`` of its
peak on the outer sixteenth of the grid for the whole run.
"""
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .errors import ConfigError
from .profiles import (
    FunctionAmplitude,
    GaussianAmplitude,
    LogCoshPhase,
    PlanePhase,
    Potential,
    QuadraticPhase,
    ZeroPhase,
)
from .solver import WkbInitialData
from .spectral import Field, make_grid
from .trajectories import quantile_seeds, uniform_seeds

OUTPUTS = ("trajectories", "density", "conservation", "classical", "caustic",
           "branches", "measures")
PLACEMENTS = ("uniform", "quantile")

_CATALOG = {
    "vortex": dict(epsilon=1.0, x0=-10.0, length=20.0, modes=2**9,
                   t_final=2 * np.pi, tsteps=10**4),
    "wavepacket": dict(epsilon=1e-3, x0=-2.0, length=5.0, modes=2**12,
                       t_final=1.0, tsteps=10**4),
    "harmonic_focus": dict(epsilon=1e-3, x0=-2.0, length=5.0, modes=2**12,
                           t_final=np.pi, tsteps=10**4),
    "free_caustic": dict(epsilon=1e-3, x0=-2.0, length=5.0, modes=2**12,
                         t_final=0.6, tsteps=10**4),
    "free_plane": dict(epsilon=1e-2, x0=-2.0, length=5.0, modes=2**10,
                       t_final=1.0, tsteps=10**3),
    "rarefaction": dict(epsilon=1e-2, x0=-4.0, length=8.0, modes=2**11,
                        t_final=0.5, tsteps=2 * 10**3),
}
SCENARIOS = tuple(_CATALOG)


@dataclass(frozen=True)
class ScenarioSpec:
    """Fully resolved run description.

    ``t_final = dt * steps``. ``stride`` is the number of steps between
    recorded snapshots; ``density_stride`` thins the x-nodes in
    ``density.csv``. ``doubling`` switches on the time-step doubling audit
    (a second run with ``2 * steps``).
    """

    name: str
    epsilon: float
    x0: float
    length: float
    modes: int
    dt: float
    tsteps: int
    seeds: int = 51
    placement: str = "uniform"
    stride: int = 100
    density_stride: int = 8
    outputs: tuple = OUTPUTS
    measure_samples: int = 10**5
    doubling: bool = True

    def __post_init__(self):
        if self.name not in _CATALOG:
            raise ConfigError(f"unknown scenario {self.name!r}; choose from {', '.join(SCENARIOS)}")
        if not (0.0 < self.epsilon <= 1.0):
            raise ConfigError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if self.modes < 8 or self.modes & (self.modes - 1):
            raise ConfigError(f"modes must be a power of two >= 8, got {self.modes}")
        if not self.length > 0:
            raise ConfigError("length must be positive")
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if self.tsteps < 1:
            raise ConfigError("tsteps must be >= 1")
        if self.seeds < 1:
            raise ConfigError("seeds must be >= 1")
        if self.placement not in PLACEMENTS:
            raise ConfigError(f"placement must be one of {PLACEMENTS}")
        if self.stride < 1 or self.density_stride < 1:
            raise ConfigError("strides must be >= 1")
        bad = set(self.outputs) - set(OUTPUTS)
        if bad:
            raise ConfigError(f"unknown outputs: {', '.join(sorted(bad))}")
        if self.measure_samples < 1:
            raise ConfigError("measure_samples must be >= 1")

    @property
    def t_final(self):
        return self.dt * self.tsteps

    def to_text(self):
        """``key=value`` lines that :func:`parse_config` reads back unchanged."""
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "name":
                lines.append(f"scenario={v}")
            elif isinstance(v, tuple):
                lines.append(f"{f.name}={','.join(v)}")
            elif isinstance(v, float):
                lines.append(f"{f.name}={v!r}")
            else:
                lines.append(f"{f.name}={v}")
        return "\n".join(lines) + "\n"


def _to_bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _to_int(text):
    val = float(text)
    if val != int(val):
        raise ValueError(f"not an integer: {text!r}")
    return int(val)


_CONVERTERS = {
    "scenario": str.strip,
    "epsilon": float,
    "x0": float,
    "length": float,
    "modes": _to_int,
    "dt": float,
    "tsteps": _to_int,
    "seeds": _to_int,
    "placement": str.strip,
    "stride": _to_int,
    "density_stride": _to_int,
    "outputs": lambda s: tuple(p.strip() for p in s.split(",") if p.strip()),
    "measure_samples": _to_int,
    "doubling": _to_bool,
}


def read_config(path):
    """Parse a ``key=value`` file into typed values.

    Blank lines and ``#`` comments are ignored. Errors name the line.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    out = {}
    for num, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{num}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _CONVERTERS:
            raise ConfigError(f"{path}:{num}: unknown key {key!r}")
        try:
            out[key] = _CONVERTERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{num}: bad value for {key}: {exc}") from exc
    return out


def parse_config(path=None, **flags):
    """Resolve a :class:`ScenarioSpec` from a config file and flag overrides.

    Flags win over file values, which win over catalog defaults. Flags
    equal to ``None`` are ignored. When only one of ``dt`` and ``tsteps`` is
    given the other is derived from the catalog end time.

    Raises
    ------
    ConfigError
        Unknown keys, malformed lines, unknown scenario or out-of-range values.
    """
    values = read_config(path) if path is not None else {}
    for key, val in flags.items():
        if key not in _CONVERTERS:
            raise ConfigError(f"unknown option {key!r}")
        if val is not None:
            values[key] = val
    name = values.pop("scenario", None)
    if name is None:
        raise ConfigError("no scenario given")
    if name not in _CATALOG:
        raise ConfigError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")
    base = dict(_CATALOG[name])
    t_final = base.pop("t_final")
    dt, steps = values.pop("dt", None), values.pop("tsteps", None)
    if dt is None and steps is None:
        steps = base["tsteps"]
    if dt is None:
        dt = t_final / steps
    elif steps is None:
        if not dt > 0:
            raise ConfigError("dt must be positive")
        steps = max(1, int(round(t_final / dt)))
    base.update(dt=dt, tsteps=steps)
    stride = values.pop("stride", None)
    if stride is None:
        stride = max(1, steps // 100)
    base["stride"] = stride
    modes = values.get("modes", base["modes"])
    base["density_stride"] = max(1, modes // 512)
    base.update(values)
    try:
        return ScenarioSpec(name=name, **base)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


# -- resolved scenarios --------------------------------------------------------


@dataclass(frozen=True)
class ShiftedPhase:
    """``S(x) = S0(x - shift)``."""

    base: object
    shift: float

    @property
    def slope_bound(self):
        return self.base.slope_bound

    def value(self, x):
        return self.base.value(np.asarray(x, dtype=float) - self.shift)

    def d1(self, x):
        return self.base.d1(np.asarray(x, dtype=float) - self.shift)

    def d2(self, x):
        return self.base.d2(np.asarray(x, dtype=float) - self.shift)


def _vortex_amplitude():
    fn = lambda x: (2.0 - 2.0 * x**2) * np.exp(-0.5 * x**2)
    dfn = lambda x: (2.0 * x**3 - 6.0 * x) * np.exp(-0.5 * x**2)
    return FunctionAmplitude(fn, dfn, (-4.5, 4.5))


def _packet_amplitude(epsilon, center):
    root = np.sqrt(epsilon)
    scale = epsilon ** -0.25
    fn = lambda x: scale * np.exp(-((x - center) / root) ** 2)
    dfn = lambda x: -2.0 * (x - center) / epsilon * fn(x)
    half = root * np.sqrt(np.log(1e3))
    return FunctionAmplitude(fn, dfn, (center - half, center + half))


@dataclass(frozen=True, eq=False)
class Scenario:
    """A spec turned into grid, initial datum, potential and seeds.

    ``amplitude`` and ``phase`` describe the datum in ``x`` as
    ``amplitude(x) exp(i phase(x) / eps)``; the classical rays start from
    them. ``symmetry_point`` is the point about which the data are mirror
    symmetric (``None`` if they are not).
    """

    spec: ScenarioSpec
    grid: object
    data: WkbInitialData
    amplitude: object
    phase: object
    potential: Potential
    symmetry_point: object = None
    extra: dict = field(default_factory=dict)

    epsilon = property(lambda self: self.spec.epsilon)
    dt = property(lambda self: self.spec.dt)
    steps = property(lambda self: self.spec.tsteps)
    snapshot_stride = property(lambda self: self.spec.stride)
    t_final = property(lambda self: self.spec.t_final)

    @property
    def is_free(self):
        return self.potential.is_zero

    def initial_field(self):
        return Field(self.grid, self.data.samples(self.grid.nodes, self.epsilon), 0.0)

    def seed_set(self, count=None, placement=None):
        count = self.spec.seeds if count is None else count
        placement = self.spec.placement if placement is None else placement
        make = uniform_seeds if placement == "uniform" else quantile_seeds
        return make(self.amplitude, count)

    def seed_window(self):
        return self.amplitude.support(1e-3)


def build_scenario(spec):
    """Instantiate the catalog entry named by ``spec``."""
    grid = make_grid(spec.x0, spec.length, spec.modes)
    eps = spec.epsilon
    bump = GaussianAmplitude(0.5, 25.0)
    if spec.name == "vortex":
        amp = _vortex_amplitude()
        phase = ZeroPhase()
        return Scenario(spec, grid, WkbInitialData(amp, phase), amp, phase,
                        Potential.harmonic(0.0, 1.0), symmetry_point=0.0)
    if spec.name == "wavepacket":
        a0 = GaussianAmplitude(0.0, 1.0)
        s0 = ZeroPhase()
        data = WkbInitialData(a0, s0, wavepacket=True, packet_center=0.5)
        return Scenario(spec, grid, data, _packet_amplitude(eps, 0.5),
                        ShiftedPhase(s0, 0.5), Potential.zero(), symmetry_point=0.5)
    if spec.name == "harmonic_focus":
        phase = ZeroPhase()
        return Scenario(spec, grid, WkbInitialData(bump, phase), bump, phase,
                        Potential.harmonic(0.5, 1.0), symmetry_point=0.5)
    if spec.name == "free_caustic":
        phase = LogCoshPhase(5.0, 2.5)
        return Scenario(spec, grid, WkbInitialData(bump, phase), bump, phase,
                        Potential.zero(), symmetry_point=0.5)
    if spec.name == "free_plane":
        phase = PlanePhase(0.5)
        return Scenario(spec, grid, WkbInitialData(bump, phase), bump, phase,
                        Potential.zero())
    amp = GaussianAmplitude(0.0, 25.0)
    phase = QuadraticPhase(1.0)
    return Scenario(spec, grid, WkbInitialData(amp, phase), amp, phase,
                    Potential.zero(), symmetry_point=0.0)


def catalog_spec(name, **overrides):
    """Catalog defaults for ``name`` with keyword overrides (flag semantics)."""
    return parse_config(None, scenario=name, **overrides)


def with_changes(spec, **changes):
    """Copy of ``spec`` with fields replaced (validated again)."""
    return replace(spec, **changes)
