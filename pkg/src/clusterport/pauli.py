"""Generalized Pauli (Weyl) operators for d-level systems.

Conventions::

    Z|k> = q^k |k>            q = exp(2*pi*i/d)
    X|k> = |k-1 mod d>        (X = sum_k |k><k+1|)
    XZ = q ZX

A :class:`PauliWord` stores, per site, the exponents ``(z, x)`` of the
ordered product ``Z^z X^x`` together with an exact global phase
``exp(i*pi*t/d)`` held as the integer ``t mod 2d``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from clusterport.errors import DimensionError

__all__ = [
    "PhaseExp",
    "PauliWord",
    "primitive_root",
    "z_matrix",
    "x_matrix",
    "negation_matrix",
    "pauli_mul",
    "pauli_dagger",
]


def _check_dim(d: int) -> None:
    if not isinstance(d, (int, np.integer)) or d < 2:
        raise DimensionError(f"level count must be an integer >= 2, got {d!r}")


def primitive_root(d: int, k: int) -> complex:
    """Return ``exp(2*pi*i*k/d)``.

    Multiples of a quarter turn are returned exactly (``1``, ``1j``, ``-1``,
    ``-1j``) so that qubit and ququart phases carry no rounding.
    """
    _check_dim(d)
    k %= d
    if (4 * k) % d == 0:
        return (1, 1j, -1, -1j)[(4 * k) // d]
    return complex(np.exp(2j * np.pi * k / d))


def z_matrix(d: int) -> np.ndarray:
    """Clock matrix ``diag(1, q, q^2, ..., q^(d-1))``."""
    _check_dim(d)
    return np.diag([primitive_root(d, k) for k in range(d)]).astype(complex)


def x_matrix(d: int) -> np.ndarray:
    """Shift matrix with ``X|k+1> = |k>``."""
    _check_dim(d)
    m = np.zeros((d, d), dtype=complex)
    for k in range(d):
        m[k, (k + 1) % d] = 1.0
    return m


def negation_matrix(d: int) -> np.ndarray:
    """Permutation ``|k> -> |-k mod d>``.

    Satisfies ``U X U^dag = X^dag`` and ``U Z U^dag = Z^dag``; it is its own
    inverse and reduces to the identity for qubits.
    """
    _check_dim(d)
    m = np.zeros((d, d), dtype=complex)
    for k in range(d):
        m[(-k) % d, k] = 1.0
    return m


@dataclass(frozen=True)
class PhaseExp:
    """Unit phase ``exp(2*pi*i*t/(2d))`` stored as ``t mod 2d``."""

    d: int
    t: int = 0

    def __post_init__(self) -> None:
        _check_dim(self.d)
        object.__setattr__(self, "t", int(self.t) % (2 * self.d))

    def __mul__(self, other: PhaseExp) -> PhaseExp:
        if other.d != self.d:
            raise DimensionError(f"phase dimension mismatch: {self.d} vs {other.d}")
        return PhaseExp(self.d, self.t + other.t)

    def conjugate(self) -> PhaseExp:
        return PhaseExp(self.d, -self.t)

    @property
    def value(self) -> complex:
        return primitive_root(2 * self.d, self.t)


def _normalize_terms(d: int, terms: Mapping[int, tuple[int, int]]) -> dict[int, tuple[int, int]]:
    out = {}
    for site, (z, x) in terms.items():
        if site < 0:
            raise IndexError(f"negative site index {site}")
        z, x = int(z) % d, int(x) % d
        if z or x:
            out[int(site)] = (z, x)
    return dict(sorted(out.items()))


@dataclass(frozen=True)
class PauliWord:
    """Phase times a tensor product of ``Z^z X^x`` factors.

    Sites absent from ``terms`` carry the identity.  Exponents are reduced
    mod ``d`` on construction.
    """

    d: int
    terms: Mapping[int, tuple[int, int]] = field(default_factory=dict)
    phase: int = 0

    def __post_init__(self) -> None:
        _check_dim(self.d)
        object.__setattr__(self, "terms", _normalize_terms(self.d, self.terms))
        object.__setattr__(self, "phase", int(self.phase) % (2 * self.d))

    def __hash__(self) -> int:
        return hash((self.d, tuple(self.terms.items()), self.phase))

    # -- constructors -------------------------------------------------------
    @classmethod
    def identity(cls, d: int) -> PauliWord:
        return cls(d)

    @classmethod
    def z(cls, d: int, site: int, power: int = 1) -> PauliWord:
        return cls(d, {site: (power, 0)})

    @classmethod
    def x(cls, d: int, site: int, power: int = 1) -> PauliWord:
        return cls(d, {site: (0, power)})

    @classmethod
    def from_string(cls, d: int, spec: str) -> PauliWord:
        """Parse ``"Z0 X2^2 Z3^-1"``-style words (sites 0-based)."""
        word = cls.identity(d)
        for tok in spec.split():
            kind, rest = tok[0].upper(), tok[1:]
            site_s, _, pow_s = rest.partition("^")
            power = int(pow_s) if pow_s else 1
            if kind == "Z":
                factor = cls.z(d, int(site_s), power)
            elif kind == "X":
                factor = cls.x(d, int(site_s), power)
            else:
                raise ValueError(f"bad Pauli token {tok!r}")
            word = word * factor
        return word

    # -- queries ------------------------------------------------------------
    @property
    def support(self) -> frozenset[int]:
        return frozenset(self.terms)

    @property
    def phase_value(self) -> complex:
        return PhaseExp(self.d, self.phase).value

    def exponents(self, site: int) -> tuple[int, int]:
        return self.terms.get(site, (0, 0))

    def is_identity(self, up_to_phase: bool = False) -> bool:
        return not self.terms and (up_to_phase or self.phase == 0)

    def restricted(self, sites) -> PauliWord:
        """Drop every factor outside ``sites`` (phase kept)."""
        keep = set(sites)
        return PauliWord(self.d, {s: e for s, e in self.terms.items() if s in keep}, self.phase)

    def relabeled(self, mapping: Mapping[int, int]) -> PauliWord:
        return PauliWord(self.d, {mapping[s]: e for s, e in self.terms.items()}, self.phase)

    def site_matrix(self, site: int) -> np.ndarray:
        z, x = self.exponents(site)
        return np.linalg.matrix_power(z_matrix(self.d), z) @ np.linalg.matrix_power(x_matrix(self.d), x)

    def matrix(self, n: int) -> np.ndarray:
        """Dense ``d^n x d^n`` realization (site 0 is the leftmost factor)."""
        if self.terms and max(self.terms) >= n:
            raise IndexError(f"word acts on site {max(self.terms)} but n={n}")
        out = np.array([[self.phase_value]], dtype=complex)
        for site in range(n):
            out = np.kron(out, self.site_matrix(site))
        return out

    def __mul__(self, other: PauliWord) -> PauliWord:
        return pauli_mul(self, other)

    def dagger(self) -> PauliWord:
        return pauli_dagger(self)

    def __str__(self) -> str:
        if not self.terms:
            body = "I"
        else:
            parts = []
            for site, (z, x) in self.terms.items():
                if z:
                    parts.append(f"Z{site}" + (f"^{z}" if z != 1 else ""))
                if x:
                    parts.append(f"X{site}" + (f"^{x}" if x != 1 else ""))
            body = " ".join(parts)
        if self.phase:
            return f"w^{self.phase}·{body}"
        return body


def pauli_mul(a: PauliWord, b: PauliWord) -> PauliWord:
    """Product ``a·b`` in canonical Z-before-X form.

    Moving ``X^x`` of ``a`` past ``Z^z`` of ``b`` on the same site costs
    ``q^(x*z)``, i.e. ``2*x*z`` in units of the 2d-th root.
    """
    if a.d != b.d:
        raise DimensionError(f"cannot multiply words with d={a.d} and d={b.d}")
    d = a.d
    phase = a.phase + b.phase
    terms = dict(a.terms)
    for site, (bz, bx) in b.terms.items():
        az, ax = terms.get(site, (0, 0))
        phase += 2 * ax * bz
        terms[site] = (az + bz, ax + bx)
    return PauliWord(d, terms, phase)


def pauli_dagger(a: PauliWord) -> PauliWord:
    """Adjoint word: ``(Z^z X^x)^dag = X^-x Z^-z = q^(xz) Z^-z X^-x``."""
    d = a.d
    phase = -a.phase
    terms = {}
    for site, (z, x) in a.terms.items():
        phase += 2 * z * x
        terms[site] = (-z, -x)
    return PauliWord(d, terms, phase)
