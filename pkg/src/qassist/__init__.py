"""Single-observable state measurement of a qubit coupled to an assistant qubit."""

from qassist.model import XyzParams, derive, hamiltonian_matrix, spectrum
from qassist.evolve import Propagator, propagator_analytic
from qassist.transfer import (
    AssistantState,
    JointProbabilities,
    SingularTransfer,
    TransferMatrix,
    abs_delta_analytic,
    joint_probabilities,
    reconstruct,
    transfer_matrix,
)

__all__ = [
    "XyzParams",
    "derive",
    "hamiltonian_matrix",
    "spectrum",
    "Propagator",
    "propagator_analytic",
    "AssistantState",
    "JointProbabilities",
    "SingularTransfer",
    "TransferMatrix",
    "abs_delta_analytic",
    "joint_probabilities",
    "reconstruct",
    "transfer_matrix",
]

__version__ = "0.1.0"
