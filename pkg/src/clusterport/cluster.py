"""Cluster-state construction, stabilizer checks and Z-basis site deletion."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from clusterport.errors import DimensionError, GraphError
from clusterport.graph import ClusterGraph, correlation_operator
from clusterport.pauli import PauliWord
from clusterport.state import (
    Basis,
    Forced,
    Seeded,
    StateVector,
    apply_controlled_phases,
    apply_pauli_word,
    measure_site,
    plus_state,
    product_state,
)

__all__ = [
    "BuildSpec",
    "build_cluster",
    "stabilizer_residuals",
    "verify_stabilizers",
    "verify_derived_relations",
    "delete_site_by_z",
    "DeletionResult",
]


@dataclass(frozen=True)
class BuildSpec:
    graph: ClusterGraph
    d: int
    input_states: Mapping[int, Sequence[complex]] = field(default_factory=dict)


def build_cluster(spec: BuildSpec) -> StateVector:
    """Product of site states followed by one controlled phase per edge.

    Input sites carry ``spec.input_states[wire]`` when given; every other
    site starts in the uniform superposition.
    """
    g, d = spec.graph, spec.d
    factors = []
    for role in g.roles:
        if role.kind == "input" and role.wire in spec.input_states:
            v = np.asarray(spec.input_states[role.wire], dtype=complex)
            if v.shape != (d,):
                raise DimensionError(f"input for wire {role.wire} has shape {v.shape}, need ({d},)")
            factors.append(v)
        else:
            factors.append(plus_state(d))
    return apply_controlled_phases(product_state(d, factors), g.edges)


def _residual(state: StateVector, word: PauliWord) -> float:
    return float(np.linalg.norm(apply_pauli_word(state, word).amps - state.amps))


def stabilizer_residuals(state: StateVector, graph: ClusterGraph) -> dict[int, float]:
    """``||K_a|phi> - |phi>||`` for every site ``a``."""
    if state.n != graph.site_count:
        raise DimensionError(f"state has {state.n} sites, graph has {graph.site_count}")
    return {a: _residual(state, correlation_operator(graph, a, state.d)) for a in range(graph.site_count)}


def verify_stabilizers(state: StateVector, graph: ClusterGraph) -> float:
    return max(stabilizer_residuals(state, graph).values())


def verify_derived_relations(state: StateVector, words: Sequence[PauliWord]) -> float:
    """Largest residual of ``w|phi> = |phi>`` over the supplied words."""
    for w in words:
        if w.d != state.d:
            raise DimensionError(f"word has d={w.d}, state has d={state.d}")
    return max(_residual(state, w) for w in words)


@dataclass(frozen=True)
class DeletionResult:
    outcome: int
    probability: float
    state: StateVector
    graph: ClusterGraph
    byproduct: PauliWord


def delete_site_by_z(
    state: StateVector, graph: ClusterGraph, site: int, policy: Seeded | Forced
) -> DeletionResult:
    """Remove a body site by measuring it in the Z basis.

    Outcome ``s`` leaves ``Z^s`` on every former neighbor; the returned
    byproduct ``Z^-s`` on those neighbors undoes it, after which the active
    sites hold the cluster state of ``graph`` minus ``site``.
    """
    if graph.roles[site].kind != "body":
        raise GraphError(f"cannot delete {graph.roles[site]} site {site}")
    s, p, collapsed = measure_site(state, site, Basis.Z, policy)
    byproduct = PauliWord(state.d, {b: (-s, 0) for b in graph.neighbors(site)})
    return DeletionResult(s, p, collapsed, graph.without_site(site), byproduct)
