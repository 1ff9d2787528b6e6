"""Measurement-conditioned semiclassical trajectories of a monitored Duffing oscillator."""

__version__ = "0.1.0"

from .model import (FIELD_CLASSICAL_FROZEN, FIELD_CLASSICAL_PASSIVE,
                    FIELD_LINEAR_OSC, FIELD_SEMICLASSICAL,
                    ForceDecomposition, ModelParams, PotentialTerms,
                    SemiclassicalState, default_initial_state, drift,
                    dissipative_force, force_decomposition, hamiltonian,
                    noise_coefficients, potential_terms,
                    variances_from_spread)
from .stochastic import NoiseStream
from .integrator import (IntegratorConfig, Trajectory, TrajectoryAbortError,
                         TrajectoryEvent, integrate, step)
from .diagnostics import (EnergyLedger, LyapunovEstimate, PoincareSection,
                          TrajectoryStats, energy_balance, energy_ledger,
                          lyapunov, poincare, trajectory_stats)
from .harness import (SweepRecord, SweepSpec, calibrate_drive,
                      classical_reference, run_sweep)

__all__ = [
    "__version__",
    "FIELD_CLASSICAL_FROZEN", "FIELD_CLASSICAL_PASSIVE", "FIELD_LINEAR_OSC",
    "FIELD_SEMICLASSICAL",
    "ForceDecomposition", "ModelParams", "PotentialTerms",
    "SemiclassicalState", "default_initial_state", "drift",
    "dissipative_force", "force_decomposition", "hamiltonian",
    "noise_coefficients", "potential_terms", "variances_from_spread",
    "NoiseStream",
    "IntegratorConfig", "Trajectory", "TrajectoryAbortError",
    "TrajectoryEvent", "integrate", "step",
    "EnergyLedger", "LyapunovEstimate", "PoincareSection", "TrajectoryStats",
    "energy_balance", "energy_ledger", "lyapunov", "poincare",
    "trajectory_stats",
    "SweepRecord", "SweepSpec", "calibrate_drive", "classical_reference",
    "run_sweep",
]
