"""Linear stability, pitchfork branches and simulation of a two-species chemotaxis-competition system."""

from .bifurcation import BranchInfo, Degenerate, NearSingular, PredictedStability, branch_table, compute_K2
from .diagnostics import count_spikes, detect_period, detect_steady_state, dominant_mode, mode_amplitudes
from .linear_analysis import (
    CharacteristicCoeffs,
    Classification,
    LossType,
    ModeWavenumber,
    StabilityReport,
    char_coeffs,
    chi_hat,
    chi_tilde,
    classify_equilibrium,
    critical_chi,
    cubic_roots,
    dispersion_table,
)
from .model import Equilibrium, ModelParams, ParameterError, compute_equilibrium, validate_params
from .solver import Advection, BlowUpError, Grid, Scheme, SolverConfig, State, Trajectory, initial_state, run, step

__version__ = "0.1.0"

__all__ = [
    "Advection",
    "BlowUpError",
    "BranchInfo",
    "CharacteristicCoeffs",
    "Classification",
    "Degenerate",
    "Equilibrium",
    "Grid",
    "LossType",
    "ModeWavenumber",
    "ModelParams",
    "NearSingular",
    "ParameterError",
    "PredictedStability",
    "Scheme",
    "SolverConfig",
    "StabilityReport",
    "State",
    "Trajectory",
    "branch_table",
    "char_coeffs",
    "chi_hat",
    "chi_tilde",
    "classify_equilibrium",
    "compute_K2",
    "compute_equilibrium",
    "count_spikes",
    "critical_chi",
    "cubic_roots",
    "detect_period",
    "detect_steady_state",
    "dispersion_table",
    "dominant_mode",
    "initial_state",
    "mode_amplitudes",
    "run",
    "step",
    "validate_params",
]
