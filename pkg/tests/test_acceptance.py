"""Acceptance gate: one test per criterion, each recording a PASS/FAIL line.

Run alone with ``python3 -m pytest tests/test_acceptance.py -v``; the lines
are repeated in an "acceptance" section at the end of the session.
"""

import itertools
import math
import time

import numpy as np
import pytest
from conftest import random_vector

from clusterport.cluster import BuildSpec, build_cluster, delete_site_by_z, verify_stabilizers
from clusterport.graph import carve_path, chain, fig2a, grid, parallel_stack, teleport_unit
from clusterport.state import (
    Basis,
    Forced,
    Seeded,
    StateVector,
    apply_pauli_word,
    extract_output_state,
    fidelity_up_to_phase,
)
from clusterport.teleport import (
    BELL_LABELS,
    bell_probabilities,
    bell_projection_probability,
    bell_vector,
    chain_positional_sums,
    classical_cost,
    convention_report,
    correction_fig2a,
    correction_qudit_chain,
    ebit_resource_check,
    run_teleport,
    two_step_bell_measure,
)

TOL = 1e-10


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def sweep(graph, d, rng, trials, correction="auto"):
    """Run ``trials`` random product inputs; return (results per trial, elapsed seconds)."""
    out = []
    start = time.perf_counter()
    for _ in range(trials):
        inputs = {w: random_vector(rng, d) for w in range(graph.wires)}
        out.append(run_teleport(graph, d, inputs, correction=correction))
    return out, time.perf_counter() - start


def worst(runs):
    return min(r.fidelity for res in runs for r in res)


def prob_error(runs):
    return max(abs(sum(r.probability for r in res) - 1) for res in runs)


def test_one_wire_teleportation(verdict, rng):
    runs, secs = sweep(teleport_unit(), 2, rng, 50)
    branches = {len(res) for res in runs}
    ok = branches == {4} and worst(runs) > 1 - TOL and prob_error(runs) < TOL and secs < 1
    verdict(1, "one-wire teleportation, 4 branches x 50 inputs", ok, f"min fidelity {worst(runs):.15f}, {secs:.2f}s")


def test_two_wire_teleportation(verdict, rng):
    runs, secs = sweep(fig2a(), 2, rng, 20, correction="oracle")
    formula_ok = all(correction_fig2a(*r.outcome_tuple()).same_as(r.correction) for res in runs for r in res)
    encodings = convention_report()["fig2a"]
    ok = (
        {len(res) for res in runs} == {16}
        and worst(runs) > 1 - TOL
        and prob_error(runs) < TOL
        and formula_ok
        and encodings == {"x=s": True, "x=1-s": False}
        and secs < 5
    )
    verdict(
        2,
        "two-wire teleportation and byproduct formula vs oracle",
        ok,
        f"min fidelity {worst(runs):.15f}, formula agrees under x=s: {formula_ok}, {secs:.2f}s",
    )


def test_stabilizer_residuals(verdict):
    cases = [
        (teleport_unit(), 2),
        (teleport_unit(), 3),
        (fig2a(), 2),
        (chain(5), 2),
        (chain(5), 3),
        (grid(3, 3), 2),
    ]
    residual = max(verify_stabilizers(build_cluster(BuildSpec(g, d)), g) for g, d in cases)
    verdict(3, "stabilizer residuals of pure clusters", residual < 1e-12, f"max residual {residual:.2e}")


def test_qudit_teleportation(verdict, rng):
    details, ok = [], True
    start = time.perf_counter()
    for d in (3, 5):
        runs, _ = sweep(teleport_unit(), d, rng, 20)
        table_ok = all(
            correction_qudit_chain(d, r.outcomes[0], r.outcomes[1]).same_as(r.correction) for res in runs for r in res
        )
        # the closed form must also agree with the brute-force search
        oracle = run_teleport(teleport_unit(), d, {0: random_vector(rng, d)}, correction="oracle")
        oracle_ok = all(correction_qudit_chain(d, r.outcomes[0], r.outcomes[1]).same_as(r.correction) for r in oracle)
        ok &= {len(res) for res in runs} == {d * d} and worst(runs) > 1 - TOL and table_ok and oracle_ok
        details.append(f"d={d} min fidelity {worst(runs):.15f}")
    secs = time.perf_counter() - start
    ok &= secs < 5
    verdict(4, "qudit teleportation with U then inverse byproduct", ok, ", ".join(details) + f", {secs:.2f}s")


def test_three_n_sufficiency(verdict, rng):
    runs, secs = sweep(parallel_stack(3), 2, rng, 10)
    ok = {len(res) for res in runs} == {64} and worst(runs) > 1 - TOL and prob_error(runs) < TOL
    verdict(5, "9 qubits carry 3 wires", ok, f"min fidelity {worst(runs):.15f}, {secs:.2f}s")


def test_collective_sums(verdict, rng):
    g = chain(7)
    results = run_teleport(g, 2, {0: random_vector(rng, 2)}, correction="oracle")
    classes = {}
    for r in results:
        classes.setdefault(chain_positional_sums(2, r.outcome_tuple()), set()).add(
            frozenset(r.correction.word.terms.items())
        )
    constant = all(len(v) == 1 for v in classes.values())
    closed = run_teleport(g, 2, {0: random_vector(rng, 2)})
    fid = min(min(r.fidelity for r in results), min(r.fidelity for r in closed))
    ok = len(results) == 64 and fid > 1 - TOL and constant and len(classes) == 4
    verdict(6, "chain(7) transfer, corrections depend only on positional sums", ok, f"{len(classes)} classes, min fidelity {fid:.15f}")


def test_resources(verdict):
    ebits = [ebit_resource_check(n) for n in (1, 2, 3)]
    ebit_ok = all(abs(e - n) < 1e-9 for e, n in zip(ebits, (1, 2, 3)))
    bits = (classical_cost(teleport_unit(), 2), classical_cost(fig2a(), 2))
    ok = ebit_ok and bits == (2, 4)
    verdict(7, "ebits of 2N chain and classical bits", ok, f"ebits {[round(e, 12) for e in ebits]}, bits {bits}")


def test_two_step_bell(verdict, rng):
    exact_err = 0.0
    for _ in range(100):
        st = StateVector(2, 2, random_vector(rng, 4))
        overlaps = {lab: abs(np.vdot(bell_vector(lab), st.amps)) ** 2 for lab in BELL_LABELS}
        for x1, x2 in itertools.product(range(2), repeat=2):
            label, p, _ = two_step_bell_measure(st, (x1, x2))
            exact_err = max(exact_err, abs(p - overlaps[label]))
    trials = 10_000
    worst_z = 0.0
    states = [np.array([1, 0, 0, 0], dtype=complex), random_vector(rng, 4), random_vector(rng, 4)]
    for i, amps in enumerate(states):
        st = StateVector(2, 2, amps)
        exact = bell_probabilities(st)
        sampler = Seeded.from_seed(100 + i)
        counts = dict.fromkeys(BELL_LABELS, 0)
        for _ in range(trials):
            counts[two_step_bell_measure(st, sampler)[0]] += 1
        for lab in BELL_LABELS:
            se = math.sqrt(exact[lab] * (1 - exact[lab]) / trials)
            dev = abs(counts[lab] / trials - exact[lab])
            worst_z = max(worst_z, dev / se if se > 0 else (0.0 if dev == 0 else math.inf))
    ok = exact_err < TOL and worst_z <= 5
    verdict(8, "two-step Bell measurement statistics", ok, f"exact error {exact_err:.1e}, worst deviation {worst_z:.2f} SE")


def test_carving(verdict, rng):
    path = [0, 1, 2, 3, 7]
    carved = carve_path(grid(3, 4), path)
    pure = build_cluster(BuildSpec(carved, 2))
    reference = build_cluster(BuildSpec(chain(5), 2))
    order = sorted(carved.to_delete)
    min_fid = 1.0
    for outcomes in itertools.product(range(2), repeat=len(order)):
        state, g = pure, carved
        for site, s in zip(order, outcomes):
            res = delete_site_by_z(state, g, site, Forced(s))
            state, g = apply_pauli_word(res.state, res.byproduct), res.graph
        record = {site: (Basis.Z, s) for site, s in zip(order, outcomes)}
        residual = extract_output_state(state, path, record)
        min_fid = min(min_fid, fidelity_up_to_phase(residual, reference))
    teleported = run_teleport(carved, 2, {0: random_vector(rng, 2)})
    tele_fid = min(r.fidelity for r in teleported)
    ok = min_fid > 1 - TOL and tele_fid > 1 - TOL and len(teleported) == 2**11
    verdict(
        9,
        "carved grid(3,4) reduces to a 5-site chain and teleports",
        ok,
        f"reduced-cluster fidelity {min_fid:.15f}, teleport fidelity {tele_fid:.15f}",
    )


def test_bell_projection_equivalence(verdict, rng):
    err = 0.0
    for _ in range(50):
        psi = random_vector(rng, 2)
        for r in run_teleport(teleport_unit(), 2, {0: psi}):
            err = max(err, abs(r.probability - bell_projection_probability(psi, *r.outcome_tuple())))
    verdict(10, "branch probabilities equal Bell projections", err < TOL, f"max error {err:.1e}")
