"""Work extraction under partial thermalization.

Two frameworks at desk scale: a qubit/qudit collision model with partial
thermalizations, and time-dependent-Hamiltonian protocols with thermalizing
channels, plus the dissipation-vs-thermalization-time analysis on top.
"""

__version__ = "0.1.0"

from .core import (
    DensityOperator,
    HamiltonianMatrix,
    Temperature,
    ValidationError,
    free_energy,
    gibbs_state,
    partial_thermalize,
    relative_entropy,
    trace_distance,
    von_neumann_entropy,
)
from . import collision, maps, qudit, seeding, tth

__all__ = [
    "__version__",
    "DensityOperator",
    "HamiltonianMatrix",
    "Temperature",
    "ValidationError",
    "free_energy",
    "gibbs_state",
    "partial_thermalize",
    "relative_entropy",
    "trace_distance",
    "von_neumann_entropy",
    "collision",
    "maps",
    "qudit",
    "seeding",
    "tth",
]
