"""
Test subsystem operators and the electron-labeled partition
"""


import math

import numpy as np
import pytest

from locapart.chem.basis import build_basis, h2
from locapart.chem.integrals import compute_integrals
from locapart.chem.manybody import (CIState, build_space, eigensolve,
                                    hamiltonian, lowdin,
                                    project_product_state)
from locapart.chem.partition import (build_partition, build_partitioned_integrals,
                                     nuclear_repulsion_share)
from locapart.chem.subsystem import (FLAVORS, MATRIX_FLAVORS, Error,
                                     NaiveReport, RealityError,
                                     SubsystemOperator,
                                     expectation, naive_site_energy,
                                     population_operator, raw_expectation,
                                     subsystem_hamiltonian, total_operator)


H2 = h2(1.4)
BASIS = build_basis(H2, "sto-3g")
TABLES = compute_integrals(BASIS, H2)
MOS = lowdin(TABLES.S)
SPACE = build_space(MOS, "fullci_2e")
PARTS = build_partitioned_integrals(
    BASIS, H2, build_partition(H2), "coarse").to_mo(MOS.coefs)


def _random_states(n, seed):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        vec = rng.normal(size=SPACE.dim) + 1j * rng.normal(size=SPACE.dim)
        yield CIState.from_vector(SPACE, vec)


def test_symmetrized_is_real():
    ops = [subsystem_hamiltonian(SPACE, PARTS, label) for label in "AB"]
    ops += [population_operator(SPACE, PARTS, label) for label in "AB"]
    for op in ops:
        assert op.is_symmetric
        assert np.allclose(op.matrix, op.matrix.T, atol=1e-12)
    for state in _random_states(1000, 11):
        for op in ops:
            expectation(state, op)
            assert abs(raw_expectation(state, op).imag) <= 1e-12


def test_stationary_is_complex():
    op = subsystem_hamiltonian(SPACE, PARTS, "A", "stationary")
    assert not op.is_symmetric
    assert not np.allclose(op.matrix, op.matrix.T, atol=1e-8)
    largest = max(abs(raw_expectation(state, op).imag)
                  for state in _random_states(50, 12))
    assert largest >= 1e-6
    # the stationary flavor never raises
    state = next(_random_states(1, 13))
    assert expectation(state, op) == raw_expectation(state, op).real
    # both flavors agree on real states
    sym = subsystem_hamiltonian(SPACE, PARTS, "A")
    real = CIState.from_vector(SPACE, np.arange(1.0, 7.0))
    assert math.isclose(expectation(real, op), expectation(real, sym),
                        abs_tol=1e-12)


def test_reality_error():
    rng = np.random.default_rng(14)
    op = SubsystemOperator("A", rng.normal(size=(6, 6)), "symmetrized")
    state = next(_random_states(1, 15))
    with pytest.raises(RealityError):
        expectation(state, op)


def test_operator_errors():
    with pytest.raises(Error):
        subsystem_hamiltonian(SPACE, PARTS, "A", "population")
    with pytest.raises(Error):
        subsystem_hamiltonian(SPACE, PARTS, "C")
    with pytest.raises(Error):
        population_operator(SPACE, PARTS, "C")


def test_flavors():
    assert set(FLAVORS) == set(MATRIX_FLAVORS) | {"naive"}
    assert NaiveReport.flavor == "naive"
    for flavor in ("naive", "hybrid"):
        with pytest.raises(Error):
            SubsystemOperator("A", np.eye(2), flavor)
    for flavor in MATRIX_FLAVORS:
        assert SubsystemOperator("A", np.eye(2), flavor).flavor == flavor


def test_sum_rules():
    h_mo, eri_mo = TABLES.to_mo(MOS.coefs)
    full = hamiltonian(SPACE, h_mo, eri_mo)
    ops = [subsystem_hamiltonian(SPACE, PARTS, label) for label in "AB"]
    assert np.allclose(total_operator(ops), full, atol=2 * PARTS.tau_2e)
    pops = [population_operator(SPACE, PARTS, label) for label in "AB"]
    assert np.allclose(total_operator(pops), 2.0 * np.eye(SPACE.dim),
                       atol=2 * PARTS.tau)


def test_ground_state():
    h_mo, eri_mo = TABLES.to_mo(MOS.coefs)
    evals, evecs = eigensolve(hamiltonian(SPACE, h_mo, eri_mo, TABLES.enuc))
    ground = CIState.from_vector(SPACE, evecs[:, 0])
    E = {label: expectation(ground, subsystem_hamiltonian(SPACE, PARTS, label))
         for label in "AB"}
    N = {label: expectation(ground, population_operator(SPACE, PARTS, label))
         for label in "AB"}
    # mirror symmetry of the molecule
    assert math.isclose(E["A"], E["B"], abs_tol=1e-8)
    assert math.isclose(N["A"], N["B"], abs_tol=1e-8)
    assert math.isclose(N["A"], 1.0, abs_tol=PARTS.tau)
    assert math.isclose(E["A"] + E["B"] + TABLES.enuc, evals[0],
                        abs_tol=2 * PARTS.tau_2e)


def test_naive_total():
    a, b = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    h_mo, eri_mo = TABLES.to_mo(MOS.coefs)
    H = hamiltonian(SPACE, h_mo, eri_mo, TABLES.enuc)
    for same_spin, coupling in ((False, "product"), (True, "triplet")):
        report = naive_site_energy(TABLES, H2, a, b, [0], [1], same_spin)
        assert math.isclose(report.total,
                            report.E_A + report.E_B + report.V_AB)
        # the site operators add up to the full Hamiltonian
        assert math.isclose(report.total, report.true_total, abs_tol=1e-10)
        state = project_product_state(SPACE, MOS, TABLES.S, a, b, coupling)
        value = np.vdot(state.coefs, H @ state.coefs).real
        assert math.isclose(report.true_total, value, abs_tol=1e-10)
        assert math.isclose(report.overlap, TABLES.S[0, 1], rel_tol=1e-12)
    with pytest.raises(Error):
        naive_site_energy(TABLES, H2, a, a, [0], [1], same_spin=True)


def test_naive_limit():
    far = h2(20.0)
    tables = compute_integrals(build_basis(far, "sto-3g"), far)
    a, b = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    report = naive_site_energy(tables, far, a, b, [0], [1])
    assert report.overlap < 1e-10
    assert math.isclose(report.E_A - report.tail_A, report.limit_A, abs_tol=1e-8)
    assert math.isclose(report.E_B - report.tail_B, report.limit_B, abs_tol=1e-8)
    assert math.isclose(report.V_AB - report.tail_AB, report.limit_AB,
                        abs_tol=1e-8)
    # half the attraction of the far electron to the near nucleus
    assert math.isclose(report.tail_A, -0.5 / 20.0, rel_tol=1e-6)
    # electron labels share the kinetic energy of both atoms,
    # so the limit is not the energy of an isolated atom
    T, own = tables.T[0, 0], tables.v_nuclei[0][0, 0]
    assert math.isclose(report.limit_A, T + 0.5 * own, abs_tol=1e-8)
    assert abs(report.limit_A - (T + own)) > 0.1


def test_isolated_atom_limit():
    far = h2(20.0)
    bas = build_basis(far, "sto-3g")
    tables = compute_integrals(bas, far)
    mos = lowdin(tables.S)
    space = build_space(mos, "fullci_2e")
    partition = build_partition(far)
    parts = build_partitioned_integrals(bas, far, partition, "coarse").to_mo(mos.coefs)
    share = nuclear_repulsion_share(far, partition)
    isolated = tables.T[0, 0] + tables.v_nuclei[0][0, 0]
    a, b = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    for coupling in ("singlet", "triplet"):
        state = project_product_state(space, mos, tables.S, a, b, coupling)
        for label in "AB":
            op = subsystem_hamiltonian(space, parts, label)
            # the far nucleus attracts as much as the far charges repel
            assert math.isclose(expectation(state, op) + share[label], isolated,
                                abs_tol=1e-3)
