"""Full quantum model: master equation and quantum-jump trajectories."""
from .fitting import FitResult, fit_cooling
from .master import LindbladSystem, MasterResult, MultiplicityError, evolve_master, steady_state_master
from .operators import (
    RECOIL_MODELS,
    build_hamiltonian,
    build_jump_operators,
    completeness_residual,
    effective_hamiltonian,
    number_operator,
)
from .states import DensityOperator, QuantumState
from .trajectories import EnsembleResult, ThermalFock, run_trajectories, trajectory_rng

__all__ = [
    "FitResult",
    "fit_cooling",
    "LindbladSystem",
    "MasterResult",
    "MultiplicityError",
    "evolve_master",
    "steady_state_master",
    "RECOIL_MODELS",
    "build_hamiltonian",
    "build_jump_operators",
    "completeness_residual",
    "effective_hamiltonian",
    "number_operator",
    "DensityOperator",
    "QuantumState",
    "EnsembleResult",
    "ThermalFock",
    "run_trajectories",
    "trajectory_rng",
]
