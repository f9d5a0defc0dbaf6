"""
Test molecules and Gaussian basis sets
"""


import math

import numpy as np
import pytest
from scipy import integrate

from locapart.chem.basis import (Error, build_basis, build_molecule,
                                 eval_basis, h2, h2_dimer, h_atom)


def test_molecule_errors():
    with pytest.raises(Error):
        build_molecule([])
    with pytest.raises(Error):
        build_molecule([("X", (0, 0, 0), "A")])
    with pytest.raises(Error):
        build_molecule([(-1.0, (0, 0, 0), "A")])
    with pytest.raises(Error):
        build_molecule([("H", (0, 0), "A")])
    with pytest.raises(Error):
        build_molecule([("H", (0, 0, 0), "")])
    # coincident nuclei
    with pytest.raises(Error):
        build_molecule([("H", (0, 0, 0), "A"), ("H", (0, 0, 0), "B")])
    with pytest.raises(Error):
        build_molecule([("H", (0, 0, 0))])


def test_molecule():
    mol = h2_dimer(5.0, 1.4)
    assert len(mol) == 4
    assert mol.region_labels == ("A", "B")
    assert mol.region_atoms("B") == [2, 3]
    assert np.allclose(mol.centroid("A"), 0.0)
    assert np.allclose(mol.centroid("B"), (0.0, 0.0, 5.0))

    assert math.isclose(h2(1.4).nuclear_repulsion(), 1.0 / 1.4)
    assert h_atom().nuclear_repulsion() == 0.0

    frag = mol.subset("B")
    assert len(frag) == 2
    assert math.isclose(frag.nuclear_repulsion(), 1.0 / 1.4)

    moved = mol.translated((1.0, 2.0, 3.0))
    assert np.allclose(moved.coords - mol.coords, (1.0, 2.0, 3.0))
    assert math.isclose(moved.nuclear_repulsion(), mol.nuclear_repulsion())

    he = build_molecule([("He", (0, 0, 0), "A"), (1, (0, 0, 2.0), "B")])
    assert list(he.charges) == [2.0, 1.0]


def test_basis_errors():
    with pytest.raises(Error):
        build_basis(h2(), "cc-pvqz")
    he = build_molecule([("He", (0, 0, 0), "A")])
    with pytest.raises(Error):
        build_basis(he, "sto-3g")
    with pytest.raises(Error):
        build_basis(h2(), "sto-3g").find(0, "pz")


def test_basis_sizes():
    mol = h2()
    assert len(build_basis(mol, "sto-3g")) == 2
    assert len(build_basis(mol, "6-31g")) == 4
    bas = build_basis(mol, "sto-3g-p")
    assert len(bas) == 8
    assert bas.labels == ("0s", "0px", "0py", "0pz", "1s", "1px", "1py", "1pz")
    assert bas.find(1, "pz") == 7
    assert bas.atom_functions([1]) == [4, 5, 6, 7]


@pytest.mark.parametrize("name", ["sto-3g", "sto-3g-p", "6-31g"])
def test_normalization(name):
    bas = build_basis(h_atom(), name)

    def radial(r, i):
        vals = eval_basis(bas, [(0.0, 0.0, r)], derivs=False).values
        return r * r * vals[i, 0] ** 2

    for i, label in enumerate(bas.labels):
        if label.endswith(("px", "py")):
            continue
        norm, _ = integrate.quad(radial, 0.0, 40.0, args=(i, ), limit=200)
        # angular factor of z**2 is 1/3 of the sphere
        factor = 4.0 * math.pi / 3.0 if label.endswith("pz") else 4.0 * math.pi
        assert math.isclose(factor * norm, 1.0, rel_tol=1e-7)


def test_parity():
    bas = build_basis(h_atom(), "sto-3g-p")
    rng = np.random.default_rng(1)
    pts = rng.normal(size=(20, 3))
    plus = eval_basis(bas, pts, derivs=False).values
    minus = eval_basis(bas, -pts, derivs=False).values
    assert np.allclose(plus[0], minus[0])
    assert np.allclose(plus[1:], -minus[1:])


def test_derivatives():
    bas = build_basis(h2(1.4), "sto-3g-p")
    rng = np.random.default_rng(2)
    pts = rng.normal(scale=1.2, size=(15, 3))
    vals = eval_basis(bas, pts)
    h = 1e-4
    lap = np.zeros_like(vals.values)
    for k in range(3):
        step = np.zeros(3)
        step[k] = h
        fp = eval_basis(bas, pts + step, derivs=False).values
        fm = eval_basis(bas, pts - step, derivs=False).values
        assert np.allclose(vals.gradients[:, :, k], (fp - fm) / (2 * h), atol=1e-6)
        lap += (fp - 2.0 * vals.values + fm) / (h * h)
    assert np.allclose(vals.laplacians, lap, atol=1e-4)


def test_translation():
    mol = h2(1.4)
    shift = np.array([0.3, -1.0, 2.0])
    bas = build_basis(mol, "sto-3g-p")
    moved = bas.translated(shift)
    rng = np.random.default_rng(3)
    pts = rng.normal(size=(10, 3))
    assert np.allclose(eval_basis(bas, pts, False).values,
                       eval_basis(moved, pts + shift, False).values)
    assert np.allclose(build_basis(mol.translated(shift), "sto-3g-p").shells[4].center,
                       moved.shells[4].center)
