"""
Test spatial partitions and region-restricted integrals
"""


import math

import numpy as np
import pytest

from locapart.chem.basis import build_basis, build_molecule, h2, h2_dimer, h_atom
from locapart.chem.grid import build_grid
from locapart.chem.integrals import compute_integrals
from locapart.chem.partition import (Error, build_partition,
                                     build_partitioned_integrals,
                                     nuclear_repulsion_share,
                                     partitioned_one_electron,
                                     partitioned_two_electron, region_of)


H2 = h2(1.4)
BASIS = build_basis(H2, "sto-3g-p")
TABLES = compute_integrals(BASIS, H2)
PARTITION = build_partition(H2)
PARTS = build_partitioned_integrals(BASIS, H2, PARTITION, "coarse")


def test_voronoi():
    normal, offset = PARTITION.plane
    assert np.allclose(normal, (0.0, 0.0, 1.0))
    assert math.isclose(offset, 0.7)
    # the bisector goes to the lowest index
    assert region_of((0.0, 0.0, 0.7), PARTITION) == 0
    assert region_of((3.0, -2.0, 0.7 + 1e-6), PARTITION) == 1
    assert region_of((0.0, 0.0, -5.0), PARTITION) == 0
    assert list(PARTITION.assign([(0, 0, 0), (0, 0, 1.4)])) == [0, 1]
    assert list(PARTITION.mask([(0, 0, 0), (0, 0, 1.4)], "B")) == [False, True]
    with pytest.raises(Error):
        PARTITION.index("C")


def test_plane():
    part = build_partition(H2, "plane", normal=(0.0, 0.0, 2.0))
    assert np.allclose(part.normal, (0.0, 0.0, 1.0))
    assert math.isclose(part.offset, 0.7)
    assert part.plane[1] == part.offset
    shifted = build_partition(H2, "plane", normal=(0.0, 0.0, 1.0), offset=0.2)
    assert region_of((0.0, 0.0, 0.2), shifted) == 0
    assert region_of((0.0, 0.0, 0.5), shifted) == 1
    assert region_of((0.0, 0.0, 0.5), part) == 0


def test_partition_errors():
    with pytest.raises(Error):
        build_partition(H2, "plane")
    with pytest.raises(Error):
        build_partition(H2, "plane", normal=(0.0, 0.0, 0.0))
    with pytest.raises(Error):
        build_partition(H2, "plane", normal=(0.0, 1.0))
    with pytest.raises(Error):
        build_partition(H2, "wigner-seitz")
    with pytest.raises(Error):
        build_partition(h2_dimer(5.0, 1.4).subset("A"), "plane", normal=(0, 0, 1))
    # one atom shared between regions puts both centroids on it
    mol = build_molecule([(1, (0, 0, -0.7), "A"), (1, (0, 0, 0.7), "A"),
                          (1, (0, 0, 0.0), "B")])
    with pytest.raises(Error):
        build_partition(mol)
    with pytest.raises(Error):
        build_partition(h_atom()).plane


def test_single_region():
    part = build_partition(h_atom())
    assert len(part) == 1
    assert np.all(part.assign(np.random.default_rng(0).normal(size=(5, 3))) == 0)


def test_one_electron_sums():
    tau = PARTS.tau
    assert np.allclose(PARTS.total_overlap(), TABLES.S, atol=tau)
    assert np.allclose(PARTS.total_core(), TABLES.h, atol=tau)
    for label in PARTS.labels:
        tables = PARTS[label]
        assert np.allclose(tables.S, tables.S.T)
        assert np.allclose(tables.attraction([0, 1]), tables.V)
    # the restricted kinetic operator is not Hermitian within one region
    T = PARTS["A"].T
    assert not np.allclose(T, T.T, atol=1e-6)
    assert np.allclose(sum(PARTS[k].T for k in PARTS.labels),
                       TABLES.T, atol=tau)
    with pytest.raises(Error):
        PARTS["C"]


def test_one_electron_single_region():
    atom = h_atom()
    basis = build_basis(atom, "sto-3g")
    full = compute_integrals(basis, atom)
    tables = partitioned_one_electron(basis, atom, build_grid(atom, "coarse"),
                                      build_partition(atom))
    assert list(tables) == ["A"]
    A = tables["A"]
    assert np.allclose(A.S, full.S, atol=1e-3)
    assert np.allclose(A.T, full.T, atol=1e-3)
    assert np.allclose(A.V, full.V, atol=1e-3)
    assert A.v_nuclei.shape == (1, 1, 1)


def test_mirror():
    A, B = PARTS["A"], PARTS["B"]
    # s functions are 0 and 4
    assert math.isclose(A.S[0, 0], B.S[4, 4], abs_tol=1e-10)
    assert math.isclose(A.T[0, 4], B.T[4, 0], abs_tol=1e-10)
    # a symmetric orbital puts half its density in each region
    sigma = np.zeros(len(BASIS))
    sigma[[0, 4]] = 1.0
    total = sigma @ PARTS.total_overlap() @ sigma
    assert math.isclose(sigma @ A.S @ sigma, 0.5 * total, rel_tol=1e-10)


def test_two_electron_sums():
    assert set(PARTS.pairs) == {("A", "A"), ("A", "B"), ("B", "A"), ("B", "B")}
    assert np.allclose(PARTS.pairs["A", "B"], PARTS.pairs["B", "A"])
    assert np.allclose(PARTS.total_eri(), TABLES.eri, atol=PARTS.tau_2e)
    for key, eri in PARTS.pairs.items():
        # same symmetry as the full tensor under particle exchange
        assert np.allclose(eri, eri.transpose(1, 0, 3, 2), atol=1e-12), key
    kernel = PARTS.kernel("A")
    assert np.allclose(kernel, PARTS.pairs["A", "A"] + PARTS.pairs["A", "B"])
    assert np.allclose(PARTS.kernel("A") + PARTS.kernel("B"), PARTS.total_eri())
    with pytest.raises(Error):
        PARTS.kernel("C")


def test_pair():
    mol = h_atom()
    grid = build_grid(mol, "coarse", two_electron=True)
    part = build_partition(mol)
    bas = build_basis(mol, "sto-3g")
    eri = partitioned_two_electron(bas, grid, part, pair=("A", "A"))
    ref = compute_integrals(bas, mol).eri
    assert eri.shape == (1, 1, 1, 1)
    assert math.isclose(eri[0, 0, 0, 0], ref[0, 0, 0, 0], abs_tol=grid.tau)
    with pytest.raises(Error):
        partitioned_two_electron(bas, grid, part, pair=("A", "B"))


def test_to_mo():
    C = np.linalg.qr(np.random.default_rng(5).normal(size=(8, 8)))[0]
    mo = PARTS.to_mo(C)
    assert np.allclose(mo["A"].S, C.T @ PARTS["A"].S @ C)
    assert np.allclose(mo["B"].T, C.T @ PARTS["B"].T @ C)
    assert np.allclose(mo.total_overlap(), C.T @ PARTS.total_overlap() @ C)
    assert mo.tau == PARTS.tau


def test_nuclear_share():
    share = nuclear_repulsion_share(H2, PARTITION)
    assert math.isclose(share["A"], 0.5 / 1.4)
    assert math.isclose(share["B"], 0.5 / 1.4)
    dimer = h2_dimer(5.0, 1.4)
    share = nuclear_repulsion_share(dimer, build_partition(dimer))
    assert math.isclose(share["A"] + share["B"], dimer.nuclear_repulsion())
    assert math.isclose(share["A"], share["B"])
    assert share["A"] > 1.0 / 1.4
    assert nuclear_repulsion_share(h_atom(), build_partition(h_atom())) == {"A": 0.0}
