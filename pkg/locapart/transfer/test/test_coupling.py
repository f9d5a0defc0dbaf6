"""
Test fragment couplings and separated-fragment limits
"""


import math

import numpy as np
import pytest

from locapart.chem.basis import build_basis, h2, h2_dimer, h_atom
from locapart.chem.grid import tier
from locapart.chem.integrals import compute_integrals
from locapart.chem.manybody import build_space, lowdin
from locapart.chem.subsystem import expectation
from locapart.transfer.coupling import (CouplingReport, LimitRow,
                                        forster_dexter,
                                        multi_electron_limit_check,
                                        pair_superposition, place_fragments,
                                        predicted_site_energy, split_ratio)
from locapart.transfer.scenario import System


def _fragments(sep):
    mol = h2(sep)
    bas = build_basis(mol, "sto-3g-p")
    tables = compute_integrals(bas, mol)
    eye = np.eye(len(bas))
    a_orbs = [eye[bas.find(0, "s")], eye[bas.find(0, "pz")]]
    b_orbs = [eye[bas.find(1, "s")], eye[bas.find(1, "pz")]]
    return mol, bas, tables, a_orbs, b_orbs


def _report(sep):
    mol, _, tables, a_orbs, b_orbs = _fragments(sep)
    return forster_dexter(tables, mol, a_orbs, b_orbs, [0], [1])


def test_dipole_limit():
    mol, _, tables, a_orbs, b_orbs = _fragments(20.0)
    report = forster_dexter(tables, mol, a_orbs, b_orbs, [0], [1])
    assert isinstance(report, CouplingReport)
    assert report.separation == 20.0
    assert np.allclose(report.direction, (0.0, 0.0, 1.0))
    # collinear transition dipoles
    assert math.isclose(report.orientation, -2.0, rel_tol=1e-12)
    assert math.isclose(report.J_transfer, report.J_dd, rel_tol=1e-5)
    assert abs(report.K[1, 0, 0, 1]) < 1e-8
    assert report.max_overlap < 1e-4
    assert np.allclose(report.V_coul, report.J + report.K)
    # mirror images up to the sign of pz
    assert np.allclose(np.diag(report.e_A), np.diag(report.e_B))
    assert math.isclose(report.e_A[0, 1], -report.e_B[0, 1], rel_tol=1e-10)


def test_exchange_decay():
    near, far = _report(4.0), _report(10.0)
    assert abs(near.K[1, 0, 0, 1]) > 100.0 * abs(far.K[1, 0, 0, 1])
    # the Coulomb coupling falls off as a power law
    ratio = far.J_transfer / near.J_transfer
    assert 0.0 < ratio < 1.0


def test_predicted_site_energy():
    mol, _, tables, a_orbs, b_orbs = _fragments(20.0)
    report = forster_dexter(tables, mol, a_orbs, b_orbs, [0], [1])
    amps = np.array([[0.0, 1.0], [1.0, 0.0]]) / math.sqrt(2.0)
    E_A = predicted_site_energy(report, amps, "A")
    E_B = predicted_site_energy(report, amps, "B")
    local = 0.5 * (report.e_A[0, 0] + report.e_A[1, 1])
    inter = 0.5 * (report.J - report.K)
    half = 0.5 * (inter[0, 1, 0, 1] + inter[1, 0, 1, 0]
                  + inter[0, 1, 1, 0] + inter[1, 0, 0, 1])
    assert math.isclose(E_A, local + half, rel_tol=1e-12)
    assert math.isclose(E_A, E_B, rel_tol=1e-12)
    # scaling the amplitudes changes nothing
    assert math.isclose(predicted_site_energy(report, 3.0 * amps), E_A, rel_tol=1e-12)
    with pytest.raises(ValueError):
        predicted_site_energy(report, amps, "C")
    assert math.isclose(split_ratio(report, amps, E_A, E_B), 0.5)


def test_pair_superposition():
    mol, _, tables, a_orbs, b_orbs = _fragments(3.0)
    mos = lowdin(tables.S)
    space = build_space(mos, "fullci_2e")
    amps = np.array([[0.0, 1.0], [1.0, 0.0]])
    state = pair_superposition(space, mos, tables.S, a_orbs, b_orbs, amps)
    assert math.isclose(np.linalg.norm(state.coefs), 1.0)
    single = pair_superposition(space, mos, tables.S, a_orbs, b_orbs,
                                np.array([[0.0, 1.0], [0.0, 0.0]]), "singlet")
    assert single.label == "singlet pair superposition"
    assert abs(np.vdot(single.coefs, state.coefs)) < 1.0


def test_limit_row():
    row = LimitRow(8.0, -1.0, -1.0, 0.4, -1.1, -1.1, -0.01)
    assert math.isclose(row.E_A_total, -0.6)


def test_measured_site_energy():
    tol = max(tier("coarse").tau, 1e-5)
    amps = np.array([[0.0, 1.0], [1.0, 0.0]]) / math.sqrt(2.0)
    for sep in (10.0, 20.0):
        system = System(h2(sep), "sto-3g-p", resolution="coarse")
        a_orbs = [system.fragment_orbital("A", "s"), system.fragment_orbital("A", "pz")]
        b_orbs = [system.fragment_orbital("B", "s"), system.fragment_orbital("B", "pz")]
        report = forster_dexter(system.tables, system.molecule, a_orbs, b_orbs,
                                [0], [1])
        state = pair_superposition(system.space, system.mos, system.tables.S,
                                   a_orbs, b_orbs, amps)
        E_A, E_B = (expectation(state, op) for op in system.site_hamiltonians())
        assert abs(E_A - predicted_site_energy(report, amps, "A")) <= tol
        assert abs(E_B - predicted_site_energy(report, amps, "B")) <= tol
        assert math.isclose(split_ratio(report, amps, E_A, E_B), 0.5, abs_tol=1e-2)


def test_place_fragments():
    dimer = h2_dimer(8.0)
    frag_a, frag_b = dimer.subset("A"), dimer.subset("B")
    mol = place_fragments(frag_a, frag_b, 5.0, (0.0, 3.0, 0.0))
    assert mol.region_labels == ("A", "B")
    assert np.allclose(mol.coords[mol.region_atoms("A")], frag_a.coords)
    assert np.allclose(mol.centroid("B"), (0.0, 5.0, 0.0))
    assert np.allclose(mol.coords[mol.region_atoms("B")] - mol.centroid("B"),
                       frag_b.coords - frag_b.coords.mean(axis=0))
    with pytest.raises(ValueError):
        place_fragments(frag_a, frag_b, 5.0, (0.0, 0.0, 0.0))


def test_multi_electron_limit():
    dimer = h2_dimer(8.0)
    rows = multi_electron_limit_check(dimer.subset("A"), dimer.subset("B"), [8.0],
                                      resolution="coarse")
    assert len(rows) == 1
    row = rows[0]
    assert row.separation == 8.0
    # the isolated-fragment energy is reproduced inside the dimer basis
    assert math.isclose(row.TV_AA, row.isolated_A, abs_tol=1e-8)
    assert math.isclose(row.E_A, row.E_B, abs_tol=1e-6)
    assert abs(row.half_V_AB) < 1e-2
    assert math.isclose(row.E_A_total, row.isolated_A + row.half_V_AB, abs_tol=2e-2)


def test_multi_electron_limit_far():
    tol = max(tier("default").tau_2e, 1e-4)
    dimer = h2_dimer(20.0)
    row, = multi_electron_limit_check(dimer.subset("A"), dimer.subset("B"), [20.0])
    assert math.isclose(row.TV_AA, row.isolated_A, abs_tol=1e-8)
    assert abs(row.E_A_total - (row.TV_AA + row.half_V_AB)) <= tol
    assert math.isclose(row.E_A, row.E_B, abs_tol=tol)


def test_multi_electron_open_shell():
    with pytest.raises(ValueError):
        multi_electron_limit_check(h_atom(), h_atom(), [8.0], resolution="coarse")
