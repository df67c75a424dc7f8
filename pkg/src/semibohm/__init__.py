"""Spectral Schroedinger solver with Bohmian and classical trajectories.

Modules
-------
spectral      periodic grids, fields, Fourier coefficients, off-grid evaluation
solver        Strang-split time stepping and conserved quantities
classical     rays, Jacobians, caustic onset, single-phase WKB fields
bohmian       Bohmian trajectories and their audits
measures      stationary phase, limiting Bohmian and Wigner measures
scenarios     scenario catalog and configuration
runner        run orchestration and CSV export
cli           the ``semibohm`` command
"""
from .errors import CausticError, ConfigError, NumericalAbort
from .profiles import (
    FunctionAmplitude,
    GaussianAmplitude,
    LogCoshPhase,
    PlanePhase,
    Potential,
    QuadraticPhase,
    TableAmplitude,
    TablePhase,
    ZeroPhase,
)
from .spectral import Field, Grid, Spectrum, eval_at, make_grid
from .solver import SolverConfig, WkbInitialData, evolve, init_state, strang_step
from .trajectories import SeedSet, TrajectoryBundle, quantile_seeds, uniform_seeds

__version__ = "0.1.0"

__all__ = [
    "CausticError",
    "ConfigError",
    "NumericalAbort",
    "FunctionAmplitude",
    "GaussianAmplitude",
    "LogCoshPhase",
    "PlanePhase",
    "Potential",
    "QuadraticPhase",
    "TableAmplitude",
    "TablePhase",
    "ZeroPhase",
    "Field",
    "Grid",
    "Spectrum",
    "eval_at",
    "make_grid",
    "SolverConfig",
    "WkbInitialData",
    "evolve",
    "init_state",
    "strang_step",
    "SeedSet",
    "TrajectoryBundle",
    "quantile_seeds",
    "uniform_seeds",
]
