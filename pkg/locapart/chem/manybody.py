"""
The :mod:`locapart.chem.manybody` module builds orthonormal molecular
orbitals, Slater determinant spaces, and many-body operator matrices.

Determinants are integer bit strings over spin-orbitals.
Spin-orbital ``2*p + s`` is spatial orbital ``p`` with spin ``s``
(0 for up, 1 for down).
A determinant stands for the product of creation operators in ascending
spin-orbital order acting on the vacuum,
so an operator on spin-orbital *k* picks up the sign
:func:`locapart.util.sign_below`.

Interface Functions:

* :func:`lowdin` --- Symmetrically orthogonalized orbitals
* :func:`rhf` --- Restricted closed-shell self-consistent field orbitals
* :func:`build_space` --- Full CI (two electrons) or singlet CIS space
* :func:`slater_condon` --- Determinant matrix of a general operator
* :func:`hamiltonian` --- Many-body Hamiltonian matrix
* :func:`eigensolve` --- Ascending eigenpairs of a symmetric matrix
* :func:`spin_squared` --- Matrix of the total spin squared
* :func:`singlet_indices` --- Indices of singlet eigenvectors
* :func:`project_product_state` --- Expand an antisymmetrized product state

Interface Classes:

* :class:`MOSet`
* :class:`DeterminantSpace`
* :class:`CIState`

Exceptions:

* :class:`Error`
* :class:`ConvergenceError`
* :class:`SpaceError`
* :class:`ProjectionError`
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import linalg

from locapart.chem.integrals import DEGENERATE_THRESHOLD, DegenerateBasisError
from locapart.util import bit_on, iter_bits, popcount, sign_below

_log = logging.getLogger(__name__)

SCHEMES = ("fullci_2e", "cis")
COUPLINGS = ("singlet", "triplet", "product")


class Error(Exception):
    """An error happened in a many-body computation."""


class ConvergenceError(Error):
    """The self-consistent field iterations did not converge."""


class SpaceError(Error):
    """A determinant space does not match the requested electron count."""


class ProjectionError(Error):
    """A product state has no component in the determinant space."""


@dataclass(frozen=True)
class MOSet:
    """Orthonormal orbitals.

    ``coefs`` maps atomic orbitals (rows) to molecular orbitals (columns).
    ``kind`` is ``lowdin`` or ``scf``;
    SCF orbitals also carry orbital energies and the total energy
    (nuclear repulsion included).
    """
    coefs: np.ndarray
    kind: str
    energies: np.ndarray = None
    total_energy: float = None
    n_electrons: int = None

    def __len__(self):
        return self.coefs.shape[1]

    def ao_to_mo(self, overlap, vec):
        """Return the MO expansion of an AO coefficient vector."""
        return self.coefs.T @ overlap @ np.asarray(vec, dtype=float)


def lowdin(S):
    """Return the symmetrically orthogonalized orbitals :math:`S^{-1/2}`.

    Raises
    ------
    DegenerateBasisError
        *S* is not safely positive definite.
    """
    evals, evecs = linalg.eigh(S)
    if evals.min() < DEGENERATE_THRESHOLD:
        fstr = "overlap matrix is near singular (smallest eigenvalue {:.3e})"
        raise DegenerateBasisError(fstr.format(evals.min()))
    coefs = (evecs / np.sqrt(evals)) @ evecs.T
    return MOSet(coefs, "lowdin")


def _coulomb_exchange(eri, dens):
    J = np.einsum("ikjl,kl->ij", eri, dens)
    K = np.einsum("ijkl,kl->ij", eri, dens)
    return J, K


def _scf_loop(tables, nocc, max_iter, tol, damping):
    S, h = tables.S, tables.h
    energies, coefs = linalg.eigh(h, S)
    occ = coefs[:, :nocc]
    dens = 2.0 * occ @ occ.T
    for it in range(1, max_iter + 1):
        J, K = _coulomb_exchange(tables.eri, dens)
        fock = h + J - 0.5 * K
        energies, coefs = linalg.eigh(fock, S)
        occ = coefs[:, :nocc]
        new = 2.0 * occ @ occ.T
        if damping:
            new = (1.0 - damping) * new + damping * dens
        delta = np.abs(new - dens).max()
        dens = new
        energy = 0.5 * np.sum(dens * (h + fock)) + tables.enuc
        _log.debug("scf iteration %d: energy %.12f, max density change %.3e",
                   it, energy, delta)
        if delta < tol:
            J, K = _coulomb_exchange(tables.eri, dens)
            fock = h + J - 0.5 * K
            energies, coefs = linalg.eigh(fock, S)
            energy = 0.5 * np.sum(dens * (h + fock)) + tables.enuc
            return coefs, energies, energy, it
    return None


def rhf(tables, n_electrons, max_iter=200, tol=1e-8, damping=0.5):
    """Return restricted closed-shell Hartree-Fock orbitals.

    The iteration starts from the core Hamiltonian guess
    and stops when the density matrix changes by less than *tol*
    (maximum absolute element).
    If plain iteration fails, it restarts once with *damping*.

    Parameters
    ----------
    tables : IntegralTables
    n_electrons : int
        Even, at most twice the basis size.

    Returns
    -------
    MOSet

    Raises
    ------
    ConvergenceError
        Neither plain nor damped iteration converged.
    """
    nbf = len(tables)
    if n_electrons <= 0 or n_electrons % 2 or n_electrons > 2 * nbf:
        fstr = "expected an even electron count in [2, {}], got {}"
        raise ValueError(fstr.format(2 * nbf, n_electrons))
    nocc = n_electrons // 2
    result = _scf_loop(tables, nocc, max_iter, tol, 0.0)
    if result is None:
        _log.info("scf did not converge, retrying with damping %g", damping)
        result = _scf_loop(tables, nocc, max_iter, tol, damping)
    if result is None:
        fstr = "scf did not converge in {} iterations"
        raise ConvergenceError(fstr.format(max_iter))
    coefs, energies, energy, niter = result
    _log.info("scf converged in %d iterations: energy %.12f", niter, energy)
    return MOSet(coefs, "scf", energies, energy, n_electrons)


def _excite(det, hole, particle):
    """Return ``(sign, det)`` of :math:`a^\\dagger_{particle} a_{hole}` on *det*."""
    sign = sign_below(det, hole)
    det ^= 1 << hole
    sign *= sign_below(det, particle)
    return sign, det | (1 << particle)


@dataclass(frozen=True)
class DeterminantSpace:
    """Space of Slater determinants with a basis of adapted vectors.

    ``adapt`` has one column per basis vector of the space,
    expressed in the determinants ``dets``.
    It is the identity for full CI;
    for CIS its columns are the reference and singlet configuration
    state functions.
    """
    n_orb: int
    n_electrons: int
    scheme: str
    dets: tuple
    adapt: np.ndarray
    labels: tuple = field(default=())

    @property
    def dim(self):
        """Return the number of basis vectors."""
        return self.adapt.shape[1]

    @cached_property
    def index(self):
        """Return the map from determinant to position."""
        return {det: i for i, det in enumerate(self.dets)}

    def to_space(self, det_coefs):
        """Return the basis expansion of determinant coefficients."""
        return self.adapt.T @ det_coefs

    def to_dets(self, coefs):
        """Return the determinant coefficients of a basis expansion."""
        return self.adapt @ coefs

    def matrix(self, det_matrix):
        """Return a determinant-basis operator in the adapted basis."""
        return self.adapt.T @ det_matrix @ self.adapt


def _fullci_2e(n_orb):
    dets = tuple((1 << p) | (1 << q)
                 for p, q in itertools.combinations(range(2 * n_orb), 2))
    return dets, np.eye(len(dets)), tuple(f"{d:b}" for d in dets)


def _cis(n_orb, n_electrons):
    nocc = n_electrons // 2
    ref = (1 << n_electrons) - 1
    dets = [ref]
    columns = [{ref: 1.0}]
    labels = ["ref"]
    for i in range(nocc):
        for a in range(nocc, n_orb):
            col = {}
            for spin in (0, 1):
                sign, det = _excite(ref, 2 * i + spin, 2 * a + spin)
                dets.append(det)
                col[det] = sign / math.sqrt(2.0)
            columns.append(col)
            labels.append(f"{i}->{a}")
    index = {det: k for k, det in enumerate(dets)}
    adapt = np.zeros((len(dets), len(columns)))
    for j, col in enumerate(columns):
        for det, val in col.items():
            adapt[index[det], j] = val
    return tuple(dets), adapt, tuple(labels)


def build_space(mos, scheme, n_electrons=2):
    """Return the :class:`DeterminantSpace` of a scheme.

    Parameters
    ----------
    mos : MOSet or int
        Orbitals (or just their count).
    scheme : str
        ``fullci_2e``: every two-electron determinant.
        ``cis``: the closed-shell reference and the singlet single
        excitations :math:`(E^\\uparrow_{ia} + E^\\downarrow_{ia})/\\sqrt 2`,
        in total ``1 + n_occ * n_virt`` vectors.
    n_electrons : int

    Raises
    ------
    SpaceError
        The scheme does not match the electron count.
    """
    n_orb = mos if isinstance(mos, int) else len(mos)
    if scheme == "fullci_2e":
        if n_electrons != 2:
            fstr = "fullci_2e needs 2 electrons, got {}"
            raise SpaceError(fstr.format(n_electrons))
        dets, adapt, labels = _fullci_2e(n_orb)
    elif scheme == "cis":
        if n_electrons <= 0 or n_electrons % 2 or n_electrons > 2 * n_orb:
            fstr = "cis needs an even electron count in [2, {}], got {}"
            raise SpaceError(fstr.format(2 * n_orb, n_electrons))
        dets, adapt, labels = _cis(n_orb, n_electrons)
    else:
        fstr = "unknown scheme {!r}, expected one of {}"
        raise SpaceError(fstr.format(scheme, SCHEMES))
    return DeterminantSpace(n_orb, n_electrons, scheme, dets, adapt, labels)


def _so_one(h, p, q):
    if p & 1 != q & 1:
        return 0.0
    return h[p >> 1, q >> 1]


def _so_two(eri, p, q, r, s):
    if p & 1 != r & 1 or q & 1 != s & 1:
        return 0.0
    return eri[p >> 1, q >> 1, r >> 1, s >> 1]


def _element(bra, ket, h, eri):
    """Return :math:`\\langle bra|O|ket\\rangle` by the Slater-Condon rules."""
    holes = ket & ~bra
    nexc = popcount(holes)
    if nexc > 2:
        return 0.0
    if nexc == 0:
        occ = list(iter_bits(ket))
        val = sum(_so_one(h, p, p) for p in occ)
        if eri is not None:
            for p in occ:
                for q in occ:
                    val += 0.5 * (_so_two(eri, p, q, p, q)
                                  - _so_two(eri, p, q, q, p))
        return val
    parts = bra & ~ket
    if nexc == 1:
        q = next(iter_bits(holes))
        p = next(iter_bits(parts))
        sign, _ = _excite(ket, q, p)
        val = _so_one(h, p, q)
        if eri is not None:
            for k in iter_bits(ket & bra):
                val += _so_two(eri, p, k, q, k) - _so_two(eri, p, k, k, q)
        return sign * val
    if eri is None:
        return 0.0
    q, s = iter_bits(holes)
    p, r = iter_bits(parts)
    sign, det = _excite(ket, q, r)
    sign2, _ = _excite(det, s, p)
    # a+_p a+_r a_s a_q = -(a+_p a_s)(a+_r a_q)
    sign = -sign * sign2
    return sign * (_so_two(eri, p, r, q, s) - _so_two(eri, p, r, s, q))


def slater_condon(dets, h, eri=None):
    """Return the determinant-basis matrix of a one- plus two-electron operator.

    Parameters
    ----------
    dets : sequence of int
    h : numpy.ndarray
        One-electron kernel over spatial orbitals; need not be symmetric.
        Element ``h[p, q]`` couples bra orbital *p* to ket orbital *q*.
    eri : numpy.ndarray, optional
        Two-electron kernel in physicist notation,
        symmetric under simultaneous exchange of both electrons,
        :math:`\\langle pq|rs\\rangle = \\langle qp|sr\\rangle`.
    """
    ndet = len(dets)
    mat = np.zeros((ndet, ndet))
    for i, bra in enumerate(dets):
        for j, ket in enumerate(dets):
            mat[i, j] = _element(bra, ket, h, eri)
    return mat


def hamiltonian(space, h_mo, eri_mo, enuc=0.0):
    """Return the many-body Hamiltonian in the adapted basis of *space*.

    Nuclear repulsion *enuc* is added to the diagonal.
    """
    mat = space.matrix(slater_condon(space.dets, h_mo, eri_mo))
    return mat + enuc * np.eye(space.dim)


def eigensolve(H, tol=1e-10):
    """Return ascending eigenvalues and orthonormal eigenvectors of *H*.

    >>> evals, _ = eigensolve(np.array([[1.0, 0.5], [0.5, 1.0]]))
    >>> [round(e, 12) for e in evals]
    [0.5, 1.5]
    """
    H = np.asarray(H)
    evals, evecs = linalg.eigh(H)
    scale = max(np.abs(H).max(), 1.0)
    resid = np.abs(H @ evecs - evecs * evals).max() if len(evals) else 0.0
    if resid > tol * scale:
        fstr = "eigenvector residual {:.3e} exceeds {:.1e}"
        raise Error(fstr.format(resid, tol * scale))
    return evals, evecs


def _spin_raise(det, p):
    """Return ``(sign, det)`` of :math:`a^\\dagger_{p\\uparrow} a_{p\\downarrow}`, or None."""
    up, down = 2 * p, 2 * p + 1
    if not bit_on(det, down) or bit_on(det, up):
        return None
    return _excite(det, down, up)


def _spin_lower(det, p):
    up, down = 2 * p, 2 * p + 1
    if not bit_on(det, up) or bit_on(det, down):
        return None
    return _excite(det, up, down)


def spin_squared(space):
    """Return the matrix of :math:`S^2` in the adapted basis of *space*.

    Uses :math:`S^2 = S_- S_+ + S_z (S_z + 1)`.
    """
    index = space.index
    ndet = len(space.dets)
    mat = np.zeros((ndet, ndet))
    for j, det in enumerate(space.dets):
        nup = sum(1 for k in iter_bits(det) if not k & 1)
        sz = 0.5 * (nup - (popcount(det) - nup))
        mat[j, j] += sz * (sz + 1.0)
        for p in range(space.n_orb):
            raised = _spin_raise(det, p)
            if raised is None:
                continue
            s1, mid = raised
            for q in range(space.n_orb):
                lowered = _spin_lower(mid, q)
                if lowered is None:
                    continue
                s2, out = lowered
                if out in index:
                    mat[index[out], j] += s1 * s2
    return space.matrix(mat)


def singlet_indices(space, evecs, tol=1e-6):
    """Return the indices of the eigenvector columns that are singlets."""
    s2 = spin_squared(space)
    vals = np.einsum("ij,ik,kj->j", evecs, s2, evecs)
    return [i for i, v in enumerate(vals) if abs(v) < tol]


@dataclass(frozen=True)
class CIState:
    """Normalized many-body state in the adapted basis of a space.

    ``loss`` is the norm lost when the state was projected into the space.
    """
    space: DeterminantSpace
    coefs: np.ndarray
    label: str = ""
    loss: float = 0.0

    def __post_init__(self):
        norm = np.linalg.norm(self.coefs)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"expected a normalized state, got norm {norm}")

    @classmethod
    def from_vector(cls, space, vec, label="", loss=0.0):
        """Return the state of *vec*, normalized."""
        vec = np.asarray(vec, dtype=complex)
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            raise ValueError("expected a non-zero vector")
        return cls(space, vec / norm, label, loss)

    @classmethod
    def from_eigen_weights(cls, space, evecs, weights, label=""):
        """Return the normalized superposition of eigenvectors.

        *weights* maps eigenvector column index to amplitude.
        """
        vec = np.zeros(evecs.shape[0], dtype=complex)
        for idx, amp in dict(weights).items():
            vec += amp * evecs[:, idx]
        return cls.from_vector(space, vec, label)


def _pair_expansion(space, x, y, spins, amp, out):
    """Add ``amp * sum x_p y_q a+_{p,s1} a+_{q,s2} |0>`` to *out*."""
    s1, s2 = spins
    index = space.index
    for p, xp in enumerate(x):
        if xp == 0.0:
            continue
        for q, yq in enumerate(y):
            if yq == 0.0:
                continue
            P, Q = 2 * p + s1, 2 * q + s2
            if P == Q:
                continue
            det = (1 << P) | (1 << Q)
            sign = sign_below(1 << Q, P)
            try:
                out[index[det]] += amp * sign * xp * yq
            except KeyError:
                pass


def project_product_state(space, mos, overlap, a, b, coupling="singlet"):
    """Expand an antisymmetrized two-electron product state in *space*.

    Parameters
    ----------
    space : DeterminantSpace
        Two-electron space.
    mos : MOSet
        Orbitals of the space.
    overlap : numpy.ndarray
        AO overlap matrix.
    a, b : array_like
        AO coefficients of the two fragment orbitals.
    coupling : str
        ``singlet``: :math:`(a_\\uparrow b_\\downarrow - a_\\downarrow b_\\uparrow)/\\sqrt 2`;
        ``triplet``: the :math:`M_S = 1` component, both spins up;
        ``product``: the single spin-orbital product, *a* up and *b* down.

    Returns
    -------
    CIState
        Normalized; ``loss`` holds the fraction of norm outside the space.

    Raises
    ------
    SpaceError
        The space does not hold two electrons.
    ProjectionError
        The product state vanishes.
    """
    if space.n_electrons != 2:
        fstr = "product states need a two-electron space, got {} electrons"
        raise SpaceError(fstr.format(space.n_electrons))
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    x = mos.ao_to_mo(overlap, a)
    y = mos.ao_to_mo(overlap, b)
    saa, sbb, sab = a @ overlap @ a, b @ overlap @ b, a @ overlap @ b

    vec = np.zeros(len(space.dets))
    if coupling == "singlet":
        amp = 1.0 / math.sqrt(2.0)
        _pair_expansion(space, x, y, (0, 1), amp, vec)
        _pair_expansion(space, x, y, (1, 0), -amp, vec)
        expected = saa * sbb + sab * sab
    elif coupling == "triplet":
        _pair_expansion(space, x, y, (0, 0), 1.0, vec)
        expected = saa * sbb - sab * sab
    elif coupling == "product":
        _pair_expansion(space, x, y, (0, 1), 1.0, vec)
        expected = saa * sbb
    else:
        fstr = "unknown coupling {!r}, expected one of {}"
        raise ValueError(fstr.format(coupling, COUPLINGS))

    coefs = space.to_space(vec)
    norm2 = float(coefs @ coefs)
    if expected <= 1e-14 or norm2 <= 1e-14:
        raise ProjectionError(f"{coupling} product state has zero norm")
    loss = max(0.0, 1.0 - norm2 / expected)
    _log.info("projected %s product state: norm %.12f, loss %.3e",
              coupling, math.sqrt(norm2), loss)
    return CIState.from_vector(space, coefs, coupling, loss)
