"""Simulation and estimate verification for mass-controlled reaction-diffusion
systems with porous-medium diffusion."""

from .core import (
    ConfigError,
    FieldState,
    GridSpec,
    InitialData,
    ReactionSystem,
    RenormalizationSpec,
    SpeciesParams,
    SweepSpec,
    TestFunctionSpec,
    Trajectory,
)
from .reactions import eval_family, make_system, regularize
from .solver import run, stable_dt, step

__all__ = [
    "ConfigError", "FieldState", "GridSpec", "InitialData", "ReactionSystem",
    "RenormalizationSpec", "SpeciesParams", "SweepSpec", "TestFunctionSpec",
    "Trajectory", "eval_family", "make_system", "regularize", "run", "stable_dt", "step",
]
