"""Flow-based generative warm starts for variational quantum eigensolvers.

Library layout: `hamiltonian` (Pauli-string operators, TFIM family, exact
diagonalization, conditioning contexts), `simulator` (dense statevector with
circuit-evaluation accounting), `ansatz` (RY-linear and Givens-SD circuit
templates), `flow` (conditional Gaussianization flow), `training`
(preference-based optimization loop), `baselines` (GD/Adam/QNSPSA and
parameter transfer), `harness` (CLI and experiment orchestration).
"""

from .ansatz import GsdSpec, HeaSpec, build_circuit, enumerate_excitations, param_count, prepare_state
from .flow import FlowConfig, FlowModel
from .hamiltonian import (
    ContextVector,
    Hamiltonian,
    PauliTerm,
    context_of,
    exact_ground_energy,
    parse_hamiltonian,
    serialize_hamiltonian,
    tfim,
)
from .simulator import EvalCounter, GateOp, StateVector, apply_gate, expectation, overlap, prepare_basis
from .training import EliteBuffer, TrainConfig, adam_update, perturb_winners, reinforce_grad, train_flow_vqe

__all__ = [
    "ContextVector",
    "EliteBuffer",
    "EvalCounter",
    "FlowConfig",
    "FlowModel",
    "GateOp",
    "GsdSpec",
    "Hamiltonian",
    "HeaSpec",
    "PauliTerm",
    "StateVector",
    "TrainConfig",
    "adam_update",
    "apply_gate",
    "build_circuit",
    "context_of",
    "enumerate_excitations",
    "exact_ground_energy",
    "expectation",
    "overlap",
    "param_count",
    "parse_hamiltonian",
    "perturb_winners",
    "prepare_basis",
    "prepare_state",
    "reinforce_grad",
    "serialize_hamiltonian",
    "tfim",
    "train_flow_vqe",
]

__version__ = "0.1.0"
