"""Dense state vectors over ``n`` sites of ``d`` levels.

Flat index convention: site 0 is the most significant base-``d`` digit.
Measured sites stay in the register, projected onto the basis vector of
their outcome, so site indices never shift.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from clusterport.errors import DimensionError, ImpossibleBranchError, ResourceError
from clusterport.pauli import PauliWord, primitive_root, x_matrix, z_matrix

__all__ = [
    "Basis",
    "StateVector",
    "Forced",
    "Seeded",
    "max_amplitudes",
    "basis_vector",
    "plus_state",
    "product_state",
    "apply_controlled_phase",
    "apply_controlled_phases",
    "apply_single_site",
    "apply_pauli_word",
    "measure_site",
    "outcome_probabilities",
    "extract_output_state",
    "fidelity_up_to_phase",
    "schmidt_entropy",
]

DEFAULT_MAX_AMPS = 2**22
NORM_TOL = 1e-9
IMPOSSIBLE_TOL = 1e-12


def max_amplitudes() -> int:
    """Register cap; overridable through ``CLUSTERPORT_MAX_AMPS``."""
    raw = os.environ.get("CLUSTERPORT_MAX_AMPS")
    return int(raw) if raw else DEFAULT_MAX_AMPS


def _check_size(d: int, n: int) -> None:
    cap = max_amplitudes()
    if d**n > cap:
        raise ResourceError(f"register of {n} sites at d={d} needs {d}**{n} amplitudes (cap {cap})")


class Basis(enum.Enum):
    Z = "Z"
    X = "X"


def basis_vector(d: int, basis: Basis, s: int) -> np.ndarray:
    """Outcome-``s`` vector of the Z basis or of the Fourier (X) basis.

    X-basis vectors ``d^-1/2 sum_k q^(s k)|k>`` are eigenvectors of the
    shift with eigenvalue ``q^s``; for qubits ``s=0`` is ``|+>``.
    """
    if not 0 <= s < d:
        raise ValueError(f"outcome {s} out of range for d={d}")
    if basis is Basis.Z:
        v = np.zeros(d, dtype=complex)
        v[s] = 1.0
        return v
    return np.array([primitive_root(d, s * k) for k in range(d)], dtype=complex) / np.sqrt(d)


def plus_state(d: int) -> np.ndarray:
    if d < 2:
        raise DimensionError(f"level count must be >= 2, got {d}")
    return np.full(d, 1 / np.sqrt(d), dtype=complex)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized amplitudes of an ``n``-site, ``d``-level register."""

    d: int
    n: int
    amps: np.ndarray

    def __post_init__(self) -> None:
        if self.d < 2:
            raise DimensionError(f"level count must be >= 2, got {self.d}")
        amps = np.asarray(self.amps, dtype=complex).reshape(-1)
        if amps.size != self.d**self.n:
            raise DimensionError(f"expected {self.d}**{self.n} amplitudes, got {amps.size}")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_amplitudes(cls, d: int, amps: Sequence[complex], normalize: bool = True) -> StateVector:
        amps = np.asarray(amps, dtype=complex).reshape(-1)
        n = round(np.log(amps.size) / np.log(d)) if amps.size > 1 else 0
        if d**n != amps.size:
            raise DimensionError(f"{amps.size} amplitudes is not a power of d={d}")
        _check_size(d, n)
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0:
                raise ValueError("zero vector cannot be normalized")
            amps = amps / norm
        return cls(d, n, amps)

    @property
    def tensor(self) -> np.ndarray:
        return self.amps.reshape((self.d,) * self.n)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def _check_site(self, site: int) -> None:
        if not 0 <= site < self.n:
            raise IndexError(f"site {site} out of range for {self.n}-site register")

    def _with_tensor(self, t: np.ndarray) -> StateVector:
        return StateVector(self.d, self.n, t.reshape(-1))


def product_state(d: int, factors: Sequence[Sequence[complex]]) -> StateVector:
    """Tensor product of single-site vectors, first factor on site 0."""
    if len(factors) == 0:
        raise ValueError("product_state needs at least one factor")
    _check_size(d, len(factors))
    out = np.ones(1, dtype=complex)
    for i, f in enumerate(factors):
        v = np.asarray(f, dtype=complex).reshape(-1)
        if v.size != d:
            raise DimensionError(f"factor {i} has length {v.size}, expected {d}")
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ValueError(f"factor {i} is the zero vector")
        if abs(norm - 1) > NORM_TOL:
            raise ValueError(f"factor {i} is not normalized (norm {norm})")
        out = np.kron(out, v / norm)
    return StateVector(d, len(factors), out / np.linalg.norm(out))


def apply_controlled_phase(state: StateVector, a: int, b: int) -> StateVector:
    """Diagonal gate ``|i, j> -> q^(i j) |i, j>`` on sites ``a`` and ``b``.

    For qubits this is the familiar CZ: only ``|1,1>`` picks up ``-1``.
    """
    state._check_site(a)
    state._check_site(b)
    if a == b:
        raise ValueError("controlled phase needs two distinct sites")
    d, n = state.d, state.n
    k = np.arange(d)
    phases = np.array([[primitive_root(d, i * j) for j in k] for i in k])
    shape = [1] * n
    shape[a], shape[b] = d, d
    if a > b:
        phases = phases.T
    return state._with_tensor(state.tensor * phases.reshape(shape))


def apply_controlled_phases(state: StateVector, edges) -> StateVector:
    """All controlled phases at once.

    Exponents ``sum i*j`` are accumulated as integers mod ``d`` and the
    amplitudes multiplied a single time, so the result does not depend on
    edge order even in floating point.
    """
    d, n = state.d, state.n
    exps = np.zeros((d,) * n, dtype=np.int64)
    grids = np.indices((d,) * n, sparse=True)
    for a, b in edges:
        state._check_site(a)
        state._check_site(b)
        if a == b:
            raise ValueError("controlled phase needs two distinct sites")
        exps = exps + grids[a] * grids[b]
    roots = np.array([primitive_root(d, k) for k in range(d)])
    return state._with_tensor(state.tensor * roots[exps % d])


def _apply_matrix(t: np.ndarray, m: np.ndarray, site: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(m, t, axes=([1], [site])), 0, site)


def apply_single_site(state: StateVector, site: int, m: np.ndarray) -> StateVector:
    state._check_site(site)
    m = np.asarray(m, dtype=complex)
    if m.shape != (state.d, state.d):
        raise DimensionError(f"expected a {state.d}x{state.d} matrix, got {m.shape}")
    if not np.allclose(m.conj().T @ m, np.eye(state.d), atol=NORM_TOL):
        raise ValueError("single-site matrix is not unitary")
    return state._with_tensor(_apply_matrix(state.tensor, m, site))


def apply_pauli_word(state: StateVector, w: PauliWord) -> StateVector:
    if w.d != state.d:
        raise DimensionError(f"word has d={w.d}, state has d={state.d}")
    t = state.tensor
    zm, xm = z_matrix(state.d), x_matrix(state.d)
    for site, (z, x) in w.terms.items():
        state._check_site(site)
        m = np.linalg.matrix_power(zm, z) @ np.linalg.matrix_power(xm, x)
        t = _apply_matrix(t, m, site)
    return state._with_tensor(w.phase_value * t)


@dataclass(frozen=True)
class Seeded:
    """Sample outcomes by the Born rule from a seeded generator."""

    rng: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int) -> Seeded:
        return cls(np.random.default_rng(seed))


@dataclass(frozen=True)
class Forced:
    """Post-select a given outcome."""

    outcome: int


def outcome_probabilities(state: StateVector, site: int, basis: Basis) -> np.ndarray:
    state._check_site(site)
    vecs = np.array([basis_vector(state.d, basis, s) for s in range(state.d)])
    amps = np.tensordot(vecs.conj(), state.tensor, axes=([1], [site]))
    return np.sum(np.abs(amps.reshape(state.d, -1)) ** 2, axis=1)


def measure_site(
    state: StateVector, site: int, basis: Basis, policy: Seeded | Forced
) -> tuple[int, float, StateVector]:
    """Projective measurement of one site.

    Returns ``(outcome, probability, collapsed_state)``.  The measured site
    is left in the basis vector of the outcome.
    """
    probs = outcome_probabilities(state, site, basis)
    if isinstance(policy, Forced):
        s = policy.outcome
        if not 0 <= s < state.d:
            raise ValueError(f"forced outcome {s} out of range for d={state.d}")
        if probs[s] < IMPOSSIBLE_TOL:
            raise ImpossibleBranchError(f"outcome {s} on site {site} has probability {probs[s]:.3g}")
    else:
        p = probs / probs.sum()
        s = int(policy.rng.choice(state.d, p=p))
    v = basis_vector(state.d, basis, s)
    reduced = np.tensordot(v.conj(), state.tensor, axes=([0], [site]))
    collapsed = np.moveaxis(np.multiply.outer(v, reduced), 0, site)
    collapsed = collapsed / np.sqrt(probs[s])
    collapsed = collapsed / np.linalg.norm(collapsed)
    return s, float(probs[s]), state._with_tensor(collapsed)


def extract_output_state(
    state: StateVector,
    output_sites: Sequence[int],
    measured: Mapping[int, tuple[Basis, int]],
) -> StateVector:
    """Residual state on ``output_sites`` (in the given order).

    Every other site must appear in ``measured`` as ``site -> (basis, s)``;
    it is contracted against its outcome vector.
    """
    outputs = list(output_sites)
    if len(set(outputs)) != len(outputs):
        raise ValueError("duplicate output sites")
    for s in outputs:
        state._check_site(s)
    missing = [s for s in range(state.n) if s not in outputs and s not in measured]
    if missing:
        raise ValueError(f"sites {missing} are neither outputs nor measured")
    t = state.tensor
    others = [s for s in range(state.n) if s not in outputs]
    # contract highest axis first so lower axis numbers stay valid
    for site in sorted(others, reverse=True):
        basis, s = measured[site]
        t = np.tensordot(basis_vector(state.d, basis, s).conj(), t, axes=([0], [site]))
    remaining = sorted(outputs)
    t = np.transpose(t, [remaining.index(s) for s in outputs])
    norm = np.linalg.norm(t)
    if norm < IMPOSSIBLE_TOL:
        raise ImpossibleBranchError("outcome record is inconsistent with the collapsed state")
    return StateVector(state.d, len(outputs), t.reshape(-1) / norm)


def fidelity_up_to_phase(a: StateVector, b: StateVector) -> float:
    """``|<a|b>|`` for normalized states."""
    if a.d != b.d or a.n != b.n:
        raise DimensionError(f"shape mismatch: (d={a.d}, n={a.n}) vs (d={b.d}, n={b.n})")
    return float(abs(np.vdot(a.amps, b.amps)))


def schmidt_entropy(state: StateVector, subset_a: Iterable[int]) -> float:
    """Base-2 entanglement entropy across ``subset_a`` versus the rest."""
    a = sorted(set(subset_a))
    for s in a:
        state._check_site(s)
    if not a or len(a) == state.n:
        raise ValueError("bipartition must be a nonempty proper subset")
    b = [s for s in range(state.n) if s not in a]
    m = np.transpose(state.tensor, a + b).reshape(state.d ** len(a), -1)
    sv = np.linalg.svd(m, compute_uv=False)
    lam = sv**2
    lam = lam[lam > 1e-15]
    lam = lam / lam.sum()
    return float(max(0.0, -np.sum(lam * np.log2(lam))))
