"""Numerical laboratory for compressible Euler flow with time-dependent
damping and its large-time approach to the Barenblatt profile of the
porous medium equation."""
from .params import DomainError, GasModel, RateTable, derive_gas_model, rate_table
from .barenblatt import BarenblattProfile, calibrate
from .solver import FluidState, Grid1D, SolverConfig, simulate
from .rates import RateSeries, SlopeFit, compare_to_theory, distance_series, fit_slope

__version__ = "0.1.0"

__all__ = [
    "DomainError", "GasModel", "RateTable", "derive_gas_model", "rate_table",
    "BarenblattProfile", "calibrate", "FluidState", "Grid1D", "SolverConfig",
    "simulate", "RateSeries", "SlopeFit", "compare_to_theory", "distance_series",
    "fit_slope",
]
