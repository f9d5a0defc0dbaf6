"""
Fragment coupling in the separated-fragment limit

For two one-electron fragments with orbitals :math:`a_i` on A and
:math:`b_j` on B, the energy localized in A of the antisymmetrized pair
states reduces to the fragment energies plus half the Coulomb (Förster)
coupling minus half the exchange (Dexter) coupling.
Closed-shell fragments reduce in the same way to the isolated fragment
energy plus half the inter-fragment interaction.

Interface Functions:
    forster_dexter
    pair_superposition
    predicted_site_energy
    split_ratio
    place_fragments
    multi_electron_limit_check

Interface Classes:
    CouplingReport
    LimitRow
"""

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from locapart.chem.basis import build_basis, build_molecule
from locapart.chem.integrals import compute_integrals
from locapart.chem.manybody import (
    CIState, build_space, project_product_state, rhf,
)
from locapart.chem.partition import (
    build_partition, build_partitioned_integrals, nuclear_repulsion_share,
)
from locapart.chem.subsystem import expectation, subsystem_hamiltonian

_log = logging.getLogger(__name__)

# Fragment overlaps above this make the limit formulas approximate
OVERLAP_WARNING = 0.1


@dataclass(frozen=True)
class CouplingReport:
    """Coupling tables of two fragments.

    ``J[i, j, k, l]`` is :math:`\\langle a_i b_j|g|a_k b_l\\rangle` and
    ``K[i, j, k, l]`` is :math:`\\langle a_i b_j|g|b_l a_k\\rangle`.
    ``e_A[i, k]`` and ``e_B[j, l]`` are full core-Hamiltonian elements
    between the orbitals of one fragment.
    ``J_dd`` is the dipole-dipole approximation of ``J[1, 0, 0, 1]``,
    built from the transition moments ``mu_A`` and ``mu_B``.
    """
    e_A: np.ndarray
    e_B: np.ndarray
    J: np.ndarray
    K: np.ndarray
    mu_A: np.ndarray
    mu_B: np.ndarray
    separation: float
    direction: np.ndarray
    J_dd: float
    max_overlap: float

    @property
    def V_coul(self):
        return self.J + self.K

    @property
    def J_transfer(self):
        """Return the Coulomb coupling of the excitation transfer A* B -> A B*."""
        return self.J[1, 0, 0, 1]

    @property
    def orientation(self):
        """Return the orientation factor of the transition dipoles."""
        ua = self.mu_A / np.linalg.norm(self.mu_A)
        ub = self.mu_B / np.linalg.norm(self.mu_B)
        n = self.direction
        return float(ua @ ub - 3.0 * (ua @ n) * (ub @ n))


def forster_dexter(tables, molecule, a_orbs, b_orbs, atoms_a, atoms_b):
    """Return the :class:`CouplingReport` of two one-electron fragments.

    Parameters
    ----------
    tables : IntegralTables
    molecule : Molecule
    a_orbs, b_orbs : sequence of array_like
        AO coefficients of the fragment orbitals, ground orbital first.
    atoms_a, atoms_b : sequence of int
        Nuclei of each fragment.
    """
    A = np.array(a_orbs, dtype=float)
    B = np.array(b_orbs, dtype=float)
    S, h, eri = tables.S, tables.h, tables.eri
    overlaps = np.abs(A @ S @ B.T)
    max_overlap = float(overlaps.max())
    if max_overlap > OVERLAP_WARNING:
        _log.warning("fragment overlap %.3f exceeds %.2f; "
                     "coupling limit formulas neglect renormalization",
                     max_overlap, OVERLAP_WARNING)

    e_A = A @ h @ A.T
    e_B = B @ h @ B.T
    J = np.einsum("pqrs,ip,jq,kr,ls->ijkl", eri, A, B, A, B, optimize=True)
    K = np.einsum("pqrs,ip,jq,lr,ks->ijkl", eri, A, B, B, A, optimize=True)

    mu_A = np.einsum("dpq,p,q->d", tables.moments, A[0], A[1])
    mu_B = np.einsum("dpq,p,q->d", tables.moments, B[0], B[1])
    ca = molecule.coords[list(atoms_a)].mean(axis=0)
    cb = molecule.coords[list(atoms_b)].mean(axis=0)
    separation = float(np.linalg.norm(cb - ca))
    n = (cb - ca) / separation
    J_dd = float((mu_A @ mu_B - 3.0 * (mu_A @ n) * (mu_B @ n)) / separation ** 3)
    _log.info("coupling at %.3f bohr: J = %.6e, K = %.6e, J_dd = %.6e",
              separation, J[1, 0, 0, 1], K[1, 0, 0, 1], J_dd)
    return CouplingReport(e_A, e_B, J, K, mu_A, mu_B, separation, n, J_dd,
                          max_overlap)


def pair_superposition(space, mos, overlap, a_orbs, b_orbs, amps,
                       coupling="triplet"):
    """Return the normalized state :math:`\\sum_{ij} c_{ij} \\psi_{ij}`.

    Every :math:`\\psi_{ij}` is the antisymmetrized product of
    :math:`a_i` and :math:`b_j` with the given spin *coupling*.
    """
    amps = np.asarray(amps)
    vec = np.zeros(space.dim, dtype=complex)
    for i, a in enumerate(a_orbs):
        for j, b in enumerate(b_orbs):
            if amps[i, j] != 0.0:
                state = project_product_state(space, mos, overlap, a, b, coupling)
                vec += amps[i, j] * state.coefs
    return CIState.from_vector(space, vec, f"{coupling} pair superposition")


def predicted_site_energy(report, amps, site="A"):
    """Return the separated-limit energy of a site for pair amplitudes *amps*.

    For same-spin pairs,

    .. math::
       E_A = \\sum c^*_{ij} c_{kl} \\left( e^A_{ik} \\delta_{jl}
             + \\frac{1}{2} (J_{ijkl} - K_{ijkl}) \\right)
    """
    c = np.asarray(amps, dtype=complex)
    norm = np.sum(np.abs(c) ** 2)
    if site == "A":
        local = np.einsum("ij,ik,kj->", np.conj(c), report.e_A, c)
    elif site == "B":
        local = np.einsum("ij,jl,il->", np.conj(c), report.e_B, c)
    else:
        raise ValueError(f"expected site 'A' or 'B', got {site!r}")
    inter = np.einsum("ij,ijkl,kl->", np.conj(c), report.J - report.K, c)
    return float(((local + 0.5 * inter) / norm).real)


def split_ratio(report, amps, energy_a, energy_b):
    """Return the share of the interaction energy localized in A.

    *energy_a* and *energy_b* are the measured site energies;
    their fragment parts are subtracted before taking the ratio.
    """
    c = np.asarray(amps, dtype=complex)
    norm = np.sum(np.abs(c) ** 2)
    local_a = np.einsum("ij,ik,kj->", np.conj(c), report.e_A, c).real / norm
    local_b = np.einsum("ij,jl,il->", np.conj(c), report.e_B, c).real / norm
    inter_a = energy_a - local_a
    inter_b = energy_b - local_b
    return float(inter_a / (inter_a + inter_b))


@dataclass(frozen=True)
class LimitRow:
    """Localized energy of closed-shell fragments at one separation.

    ``E_A`` is the electronic energy localized in A,
    ``share_A`` its share of nuclear repulsion,
    ``isolated_A`` the total energy of fragment A alone,
    and ``TV_AA`` and ``half_V_AB`` the intra-fragment energy and half the
    inter-fragment interaction computed from isolated fragment densities.
    """
    separation: float
    E_A: float
    E_B: float
    share_A: float
    isolated_A: float
    TV_AA: float
    half_V_AB: float

    @property
    def E_A_total(self):
        return self.E_A + self.share_A


def _coulomb(eri, dens):
    return np.einsum("ikjl,kl->ij", eri, dens)


def _exchange(eri, dens):
    return np.einsum("ijkl,kl->ij", eri, dens)


def _fragment_density(molecule, basis, label, basis_name):
    frag = molecule.subset(label)
    ftables = compute_integrals(build_basis(frag, basis_name), frag)
    nelec = int(round(frag.charges.sum()))
    mos = rhf(ftables, nelec)
    occ = mos.coefs[:, :nelec // 2]
    idx = basis.atom_functions(molecule.region_atoms(label))
    dens = np.zeros((len(basis), len(basis)))
    dens[np.ix_(idx, idx)] = 2.0 * occ @ occ.T
    return dens, mos.total_energy


def _pair_repulsion(molecule, atoms_a, atoms_b):
    """Return the repulsion within one set of nuclei, or between two sets."""
    if set(atoms_a) == set(atoms_b):
        pairs = itertools.combinations(atoms_a, 2)
    else:
        pairs = itertools.product(atoms_a, atoms_b)
    val = 0.0
    for i, j in pairs:
        dist = np.linalg.norm(molecule.coords[i] - molecule.coords[j])
        val += molecule.charges[i] * molecule.charges[j] / dist
    return val


def place_fragments(fragment_a, fragment_b, separation, axis=(0.0, 0.0, 1.0)):
    """Return one molecule made of two fragments *separation* bohr apart.

    Fragment A keeps its coordinates.
    Fragment B is translated so that its nuclear centroid lies
    *separation* along *axis* from the centroid of A.
    The nuclei of A form region ``A`` and those of B region ``B``.
    """
    axis = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(axis)
    if norm == 0.0:
        raise ValueError("expected a non-zero axis")
    center_a = fragment_a.coords.mean(axis=0)
    center_b = fragment_b.coords.mean(axis=0)
    shift = center_a + separation * axis / norm - center_b
    nuclei = [(q, pos, "A") for q, pos in zip(fragment_a.charges, fragment_a.coords)]
    nuclei += [(q, pos + shift, "B")
               for q, pos in zip(fragment_b.charges, fragment_b.coords)]
    return build_molecule(nuclei)


def _closed_shell_count(fragment, name):
    nelec = int(round(fragment.charges.sum()))
    if nelec % 2:
        fstr = "fragment {} has {} electrons; expected a closed shell"
        raise ValueError(fstr.format(name, nelec))
    return nelec


def multi_electron_limit_check(fragment_a, fragment_b, separations,
                               basis_name="sto-3g", resolution="default",
                               axis=(0.0, 0.0, 1.0)):
    """Return a :class:`LimitRow` per separation of two closed-shell fragments.

    Parameters
    ----------
    fragment_a, fragment_b : Molecule
        Neutral fragments with an even number of electrons.
        Their region labels are ignored.
    separations : sequence of float
        Distances between the fragment centroids, in bohr.
    basis_name : str
    resolution : str or mapping
        Grid tier of the region-restricted integrals.
    axis : array_like
        Direction from the centroid of A to the centroid of B.

    The joint system is described by its closed-shell determinant;
    ``E_A`` is the expectation of the symmetrized subsystem Hamiltonian.
    """
    nelec = (_closed_shell_count(fragment_a, "A")
             + _closed_shell_count(fragment_b, "B"))
    rows = []
    for sep in separations:
        molecule = place_fragments(fragment_a, fragment_b, sep, axis)
        basis = build_basis(molecule, basis_name)
        tables = compute_integrals(basis, molecule)
        partition = build_partition(molecule)
        mos = rhf(tables, nelec)
        parts = build_partitioned_integrals(basis, molecule, partition,
                                            resolution).to_mo(mos.coefs)
        space = build_space(mos, "cis", nelec)
        ref = np.zeros(space.dim)
        ref[0] = 1.0
        state = CIState.from_vector(space, ref, "closed shell")
        energy = {label: expectation(state, subsystem_hamiltonian(space, parts, label))
                  for label in partition.labels}
        share = nuclear_repulsion_share(molecule, partition)

        atoms_a = molecule.region_atoms("A")
        atoms_b = molecule.region_atoms("B")
        dens_a, isolated_a = _fragment_density(molecule, basis, "A", basis_name)
        dens_b, _ = _fragment_density(molecule, basis, "B", basis_name)
        eri = tables.eri
        tv_aa = (np.sum(dens_a * (tables.T + tables.attraction(atoms_a)))
                 + 0.5 * np.sum(dens_a * (_coulomb(eri, dens_a)
                                          - 0.5 * _exchange(eri, dens_a)))
                 + _pair_repulsion(molecule, atoms_a, atoms_a))
        v_ab = (np.sum(dens_a * tables.attraction(atoms_b))
                + np.sum(dens_b * tables.attraction(atoms_a))
                + np.sum(dens_a * _coulomb(eri, dens_b))
                + _pair_repulsion(molecule, atoms_a, atoms_b))
        row = LimitRow(sep, energy["A"], energy["B"], share["A"], isolated_a,
                       float(tv_aa), float(0.5 * v_ab))
        _log.info("separation %.2f: E_A + share = %.8f, isolated = %.8f",
                  sep, row.E_A_total, isolated_a)
        rows.append(row)
    return rows
