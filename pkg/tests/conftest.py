import itertools

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_vector(rng, size):
    v = rng.normal(size=size) + 1j * rng.normal(size=size)
    return v / np.linalg.norm(v)


def digits(index, d, n):
    """Base-d digits of a flat index, site 0 most significant."""
    out = []
    for _ in range(n):
        out.append(index % d)
        index //= d
    return out[::-1]


def dense_controlled_phase(d, n, a, b):
    """Full diagonal matrix of the controlled phase built digit by digit."""
    q = np.exp(2j * np.pi / d)
    diag = np.empty(d**n, dtype=complex)
    for idx in range(d**n):
        dg = digits(idx, d, n)
        diag[idx] = q ** (dg[a] * dg[b])
    return np.diag(diag)


def dense_single(d, n, site, m):
    out = np.eye(1, dtype=complex)
    for s in range(n):
        out = np.kron(out, m if s == site else np.eye(d))
    return out


def dense_cluster(d, n, edges, site_states):
    """Cluster state from explicit kron products and dense gate matrices."""
    psi = np.ones(1, dtype=complex)
    for v in site_states:
        psi = np.kron(psi, v)
    for a, b in edges:
        psi = dense_controlled_phase(d, n, a, b) @ psi
    return psi


def all_outcomes(d, k):
    return list(itertools.product(range(d), repeat=k))


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Record one acceptance line, then fail the test if the check failed."""

    def record(number, title, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}"
        if detail:
            line += f" ({detail})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
