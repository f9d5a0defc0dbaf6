"""
Subsystem operators in the many-body determinant basis

The subsystem Hamiltonian of region A uses the region-restricted core
Hamiltonian as its one-electron kernel and the sum of the pair-restricted
repulsion tensors over all partner regions as its two-electron kernel.
Its expectation value is the electronic energy localized in A.

Flavors:
    stationary
        The restricted kernels as they are; the matrix is not symmetric.
    symmetrized
        One-electron kernel replaced by ``(h + h.T) / 2``;
        the matrix is real symmetric, so expectations are real for any state.
    population
        Kernel is the restricted overlap; the expectation is the number of
        electrons in A.
    naive
        Electron-labeled partition of a two-fragment product state.
        It has no many-body matrix; :func:`naive_site_energy` returns
        its energies as a :class:`NaiveReport`.

Interface Functions:
    subsystem_hamiltonian
    population_operator
    total_operator
    expectation
    raw_expectation
    naive_site_energy

Interface Classes:
    SubsystemOperator
    NaiveReport

Exceptions:
    Error
    RealityError
"""

import logging
from dataclasses import dataclass

import numpy as np

from locapart.chem import partition as partmod
from locapart.chem.manybody import slater_condon

_log = logging.getLogger(__name__)

FLAVORS = ("stationary", "symmetrized", "population", "naive")

# Flavors with a many-body matrix
MATRIX_FLAVORS = FLAVORS[:3]

# Largest allowed imaginary part of a real-valued expectation
REALITY_TOL = 1e-12


class Error(Exception):
    """An error happened while assembling a subsystem operator."""


class RealityError(Error):
    """An expectation that must be real has an imaginary part."""


@dataclass(frozen=True)
class SubsystemOperator:
    """Many-body matrix of a subsystem operator of one region."""
    label: str
    matrix: np.ndarray
    flavor: str

    def __post_init__(self):
        if self.flavor not in MATRIX_FLAVORS:
            fstr = "flavor {!r} has no many-body matrix; expected one of {}"
            raise Error(fstr.format(self.flavor, MATRIX_FLAVORS))

    @property
    def is_symmetric(self):
        return self.flavor in ("symmetrized", "population")


def _region(parts_mo, label):
    try:
        return parts_mo[label]
    except partmod.Error as exc:
        raise Error(str(exc)) from exc


def subsystem_hamiltonian(space, parts_mo, label, flavor="symmetrized"):
    """Return the subsystem Hamiltonian of region *label*.

    Parameters
    ----------
    space : DeterminantSpace
    parts_mo : PartitionedIntegrals
        Restricted tables in the orthonormal orbital basis of *space*.
    label : str
    flavor : str
        ``stationary`` or ``symmetrized``.

    Returns
    -------
    SubsystemOperator
    """
    if flavor not in ("stationary", "symmetrized"):
        fstr = "expected flavor 'stationary' or 'symmetrized', got {!r}"
        raise Error(fstr.format(flavor))
    tables = _region(parts_mo, label)
    h = tables.h
    if flavor == "symmetrized":
        h = 0.5 * (h + h.T)
    kernel = parts_mo.kernel(label)
    mat = space.matrix(slater_condon(space.dets, h, kernel))
    return SubsystemOperator(label, mat, flavor)


def population_operator(space, parts_mo, label):
    """Return the electron-count operator of region *label*."""
    tables = _region(parts_mo, label)
    mat = space.matrix(slater_condon(space.dets, tables.S))
    return SubsystemOperator(label, mat, "population")


def total_operator(ops):
    """Return the sum of the matrices of several operators."""
    return sum(op.matrix for op in ops)


def raw_expectation(state, op):
    """Return the complex expectation :math:`c^\\dagger M c`."""
    c = state.coefs
    return complex(np.conj(c) @ op.matrix @ c)


def expectation(state, op):
    """Return the real part of the expectation of *op* in *state*.

    Raises
    ------
    RealityError
        A symmetrized or population operator gave an imaginary part.
    """
    val = raw_expectation(state, op)
    if op.is_symmetric and abs(val.imag) > REALITY_TOL:
        fstr = "{} operator of region {!r} has imaginary expectation {:.3e}"
        raise RealityError(fstr.format(op.flavor, op.label, val.imag))
    return val.real


@dataclass(frozen=True)
class NaiveReport:
    """Site energies of the electron-labeled (naive) partition.

    ``E_A``, ``E_B`` and ``V_AB`` are the naive site and interaction
    energies, and ``total`` is their sum.
    ``true_total`` is the expectation of the full Hamiltonian.
    ``limit_*`` are the separated-fragment values and ``tail_*`` the
    leading finite-separation corrections, so that ``E_A - tail_A``
    approaches ``limit_A``.
    """
    E_A: float
    E_B: float
    V_AB: float
    total: float
    true_total: float
    limit_A: float
    limit_B: float
    limit_AB: float
    tail_A: float
    tail_B: float
    tail_AB: float
    overlap: float

    flavor = "naive"


def _pair_repulsion(molecule, atoms_a, atoms_b):
    val = 0.0
    for i in atoms_a:
        for j in atoms_b:
            if i != j:
                dist = np.linalg.norm(molecule.coords[i] - molecule.coords[j])
                val += molecule.charges[i] * molecule.charges[j] / dist
    return val


def naive_site_energy(tables, molecule, a, b, atoms_a, atoms_b, same_spin=False):
    """Return the :class:`NaiveReport` of a two-fragment, two-electron state.

    The state is :math:`(|a(1) b(2)\\rangle - |b(1) a(2)\\rangle)/\\sqrt 2`,
    electron 1 labeled as belonging to fragment A and electron 2 to B.
    The site operators are

    * :math:`H_{A1} = T(1) + V_A(1)`
    * :math:`H_{B2} = T(2) + V_B(2)`
    * :math:`V_{12} = V^{nn}_{AB} + g(1, 2) + V_A(2) + V_B(1)`

    Parameters
    ----------
    tables : IntegralTables
    molecule : Molecule
    a, b : array_like
        AO coefficients of the fragment orbitals.
    atoms_a, atoms_b : sequence of int
        Nuclei of each fragment.
    same_spin : bool
        Parallel spins (the exchange term survives); default antiparallel.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    S, T, eri = tables.S, tables.T, tables.eri
    VA = tables.attraction(atoms_a)
    VB = tables.attraction(atoms_b)
    chi = 1.0 if same_spin else 0.0
    nn_ab = _pair_repulsion(molecule, atoms_a, atoms_b)
    nn_aa = 0.5 * _pair_repulsion(molecule, atoms_a, atoms_a)
    nn_bb = 0.5 * _pair_repulsion(molecule, atoms_b, atoms_b)

    def one(f, x, y, z, w, electron):
        if electron == 1:
            return (x @ f @ z) * (y @ S @ w)
        return (x @ S @ z) * (y @ f @ w)

    def two(x, y, z, w):
        return np.einsum("ijkl,i,j,k,l->", eri, x, y, z, w)

    def expect(func):
        direct = func(a, b, a, b) + func(b, a, b, a)
        cross = func(a, b, b, a) + func(b, a, a, b)
        return 0.5 * (direct - chi * cross)

    norm = expect(lambda x, y, z, w: (x @ S @ z) * (y @ S @ w))
    if norm <= 1e-14:
        raise Error("naive product state has zero norm")

    def site(f, electron, const):
        val = expect(lambda x, y, z, w: one(f, x, y, z, w, electron))
        return val / norm + const

    E_A = site(T + VA, 1, nn_aa)
    E_B = site(T + VB, 2, nn_bb)
    V_AB = (nn_ab + expect(two) / norm
            + site(VA, 2, 0.0) + site(VB, 1, 0.0))
    total = E_A + E_B + V_AB

    h = tables.h
    true_total = (site(h, 1, 0.0) + site(h, 2, 0.0)
                  + expect(two) / norm + tables.enuc)

    saa = a @ S @ a
    sbb = b @ S @ b
    TA = (a @ T @ a) / saa
    TB = (b @ T @ b) / sbb
    VAa = (a @ VA @ a) / saa
    VBb = (b @ VB @ b) / sbb
    tail_A = 0.5 * (b @ VA @ b) / sbb
    tail_B = 0.5 * (a @ VB @ a) / saa
    tail_AB = nn_ab + two(a, b, a, b) / (saa * sbb) + tail_A + tail_B
    overlap = abs(a @ S @ b) / np.sqrt(saa * sbb)
    if overlap > 1e-6:
        _log.info("naive partition at fragment overlap %.3e; "
                  "separated-fragment limits are approximate", overlap)

    return NaiveReport(
        E_A=E_A, E_B=E_B, V_AB=V_AB, total=total, true_total=true_total,
        limit_A=0.5 * (TA + TB + VAa),
        limit_B=0.5 * (TA + TB + VBb),
        limit_AB=0.5 * (VAa + VBb),
        tail_A=tail_A, tail_B=tail_B, tail_AB=tail_AB,
        overlap=overlap,
    )
