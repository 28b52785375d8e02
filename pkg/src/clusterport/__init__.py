"""Cluster-state teleportation simulator for qubits and qudits."""

from clusterport.errors import (
    ClusterportError,
    DimensionError,
    GraphError,
    ImpossibleBranchError,
    ProtocolBrokenError,
    ResourceError,
)
from clusterport.graph import ClusterGraph, Role, carve_path, chain, fig2a, grid, parallel_stack, teleport_unit
from clusterport.pauli import PauliWord, negation_matrix, x_matrix, z_matrix
from clusterport.state import Basis, Forced, Seeded, StateVector
from clusterport.teleport import Correction, ProtocolResult, run_teleport

__version__ = "0.1.0"

__all__ = [
    "ClusterportError",
    "DimensionError",
    "GraphError",
    "ImpossibleBranchError",
    "ProtocolBrokenError",
    "ResourceError",
    "ClusterGraph",
    "Role",
    "carve_path",
    "chain",
    "fig2a",
    "grid",
    "parallel_stack",
    "teleport_unit",
    "PauliWord",
    "negation_matrix",
    "x_matrix",
    "z_matrix",
    "Basis",
    "Forced",
    "Seeded",
    "StateVector",
    "Correction",
    "ProtocolResult",
    "run_teleport",
]
