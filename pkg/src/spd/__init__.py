"""Sparse Pauli dynamics: Heisenberg-picture evolution of sparse Pauli sums
under Trotterized Hamiltonians, with coefficient and X-weight truncation."""

from .evolution import EvolutionConfig, PauliRotation, Trajectory, apply_rotation, evolve, trotter_step
from .kernels import backend_name
from .models import (
    Hamiltonian,
    LatticeSpec,
    build_tfim,
    build_tilted_ising,
    build_xx_ladder,
    ladder_density,
    local_energy,
)
from .pauli_algebra import PauliTerm, anticommutes, multiply
from .pauli_sum import PauliSum, TermLimitError

__version__ = "0.1.0"

__all__ = [
    "EvolutionConfig",
    "Hamiltonian",
    "LatticeSpec",
    "PauliRotation",
    "PauliSum",
    "PauliTerm",
    "TermLimitError",
    "Trajectory",
    "anticommutes",
    "apply_rotation",
    "backend_name",
    "build_tfim",
    "build_tilted_ising",
    "build_xx_ladder",
    "evolve",
    "ladder_density",
    "local_energy",
    "multiply",
    "trotter_step",
]
