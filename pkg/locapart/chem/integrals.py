"""
The :mod:`locapart.chem.integrals` module computes closed-form integrals
over contracted s/p Cartesian Gaussians:
overlap, kinetic energy, nuclear attraction, first moments,
and electron repulsion.

Integrals use the Hermite Gaussian expansion of primitive products.
Electron repulsion integrals are stored in physicist notation,

.. math::
   \\langle ij|kl \\rangle = \\iint \\phi_i(1) \\phi_j(2) r_{12}^{-1}
                            \\phi_k(1) \\phi_l(2)

and every conversion to or from chemist notation stays inside this module.

Interface Functions:

* :func:`boys` --- Boys function :math:`F_m(x)`
* :func:`compute_integrals` --- Return the full-space :class:`IntegralTables`
* :func:`potential_on_points` --- Potential of every basis product at points
* :func:`transform_one` --- Transform a one-electron matrix
* :func:`transform_eri` --- Transform a physicist-notation ERI tensor
* :func:`format_arrays` --- Format named arrays as labeled text lines
* :func:`dump_tables` --- Write integral tables to a text file

Interface Classes:

* :class:`IntegralTables`

Exceptions:

* :class:`Error`
* :class:`DegenerateBasisError`
"""

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

_log = logging.getLogger(__name__)

# Below this argument the Boys function uses its Taylor series
_BOYS_SMALL = 1e-8

# Smallest allowed eigenvalue of the overlap matrix
DEGENERATE_THRESHOLD = 1e-10

# Number of potential evaluation points processed at once
_POINT_CHUNK = 4096


class Error(Exception):
    """An error happened while computing integrals."""


class DegenerateBasisError(Error):
    """The basis set is (numerically) linearly dependent."""


def boys(m, x):
    r"""Return the Boys function :math:`F_m(x) = \int_0^1 t^{2m} e^{-x t^2} dt`.

    The function uses the regularized lower incomplete gamma function,

    .. math::
       F_m(x) = \frac{\Gamma(m + 1/2) P(m + 1/2, x)}{2 x^{m + 1/2}}

    and a three-term Taylor series near zero.

    Parameters
    ----------
    m : int
        Order, :math:`m \ge 0`.
    x : float or array_like
        Non-negative argument.

    >>> boys(0, 0.0)
    1.0
    >>> round(boys(2, 0.0), 12)
    0.2
    """
    if m < 0:
        raise ValueError("expected m >= 0")
    x = np.asarray(x, dtype=float)
    small = x < _BOYS_SMALL
    safe = np.where(small, 1.0, x)
    half = m + 0.5
    big = special.gamma(half) * special.gammainc(half, safe) / (2.0 * safe ** half)
    series = (1.0 / (2 * m + 1) - x / (2 * m + 3)
              + x * x / (2.0 * (2 * m + 5)))
    out = np.where(small, series, big)
    if out.ndim == 0:
        return float(out)
    return out


def _hermite_e(imax, jmax, qx, a, b):
    """Return 1D Hermite expansion coefficients of a primitive product.

    The result maps ``(i, j, t)`` to an array over primitive pairs,
    for ``i <= imax``, ``j <= jmax``, ``t <= i + j``.
    *qx* is the coordinate difference ``A - B`` of the two centers.
    """
    p = a + b
    mu = a * b / p
    xpa = -b / p * qx
    xpb = a / p * qx
    inv2p = 0.5 / p

    table = {(0, 0, 0): np.exp(-mu * qx * qx)}

    def get(i, j, t):
        if t < 0 or t > i + j:
            return 0.0
        return table[i, j, t]

    for i in range(imax):
        for t in range(i + 2):
            table[i + 1, 0, t] = (inv2p * get(i, 0, t - 1)
                                  + xpa * get(i, 0, t)
                                  + (t + 1) * get(i, 0, t + 1))
    for i in range(imax + 1):
        for j in range(jmax):
            for t in range(i + j + 2):
                table[i, j + 1, t] = (inv2p * get(i, j, t - 1)
                                      + xpb * get(i, j, t)
                                      + (t + 1) * get(i, j, t + 1))
    return table


def _hermite_r(ltot, alpha, pc):
    """Return Hermite Coulomb integrals R[t, u, v] for ``t+u+v <= ltot``.

    *alpha* has the broadcast shape of the leading axes of *pc*,
    whose last axis holds the components of ``P - C``.
    """
    x = alpha * np.einsum("...k,...k->...", pc, pc)
    xpc, ypc, zpc = pc[..., 0], pc[..., 1], pc[..., 2]
    prev = {}
    for n in range(ltot, -1, -1):
        cur = {(0, 0, 0): (-2.0 * alpha) ** n * boys(n, x)}
        for total in range(1, ltot - n + 1):
            for t in range(total, -1, -1):
                for u in range(total - t, -1, -1):
                    v = total - t - u
                    if t > 0:
                        val = xpc * prev[t - 1, u, v]
                        if t > 1:
                            val = val + (t - 1) * prev[t - 2, u, v]
                    elif u > 0:
                        val = ypc * prev[t, u - 1, v]
                        if u > 1:
                            val = val + (u - 1) * prev[t, u - 2, v]
                    else:
                        val = zpc * prev[t, u, v - 1]
                        if v > 1:
                            val = val + (v - 1) * prev[t, u, v - 2]
                    cur[t, u, v] = val
        prev = cur
    return prev


class _ShellPair:
    """Primitive-pair data for a pair of shells."""

    def __init__(self, sa, sb):
        na, nb = len(sa.exps), len(sb.exps)
        a = np.repeat(sa.exps, nb)
        b = np.tile(sb.exps, na)
        self.la = sa.ell
        self.lb = sb.ell
        self.coefs = np.outer(sa.coefs, sb.coefs).ravel()
        self.p = a + b
        self.b = b
        self.center = (a[:, None] * sa.center + b[:, None] * sb.center) / self.p[:, None]
        diff = sa.center - sb.center
        self.e = [_hermite_e(sa.ell, sb.ell + 2, diff[d], a, b) for d in range(3)]

    def terms(self, pa, pb):
        """Return ``[((t, u, v), E_tuv), ...]`` for one component pair."""
        ranges = [range(pa[d] + pb[d] + 1) for d in range(3)]
        out = []
        for t, u, v in itertools.product(*ranges):
            coef = (self.e[0][pa[0], pb[0], t]
                    * self.e[1][pa[1], pb[1], u]
                    * self.e[2][pa[2], pb[2], v])
            out.append(((t, u, v), coef))
        return out

    def overlap_1d(self, d, i, j):
        """Return the 1D overlap of powers *i*, *j* along axis *d*."""
        if j < 0:
            return 0.0
        return self.e[d][i, j, 0] * np.sqrt(math.pi / self.p)

    def kinetic_1d(self, d, i, j):
        """Return the 1D kinetic factor of powers *i*, *j* along axis *d*."""
        b = self.b
        val = (-2.0 * b * b * self.overlap_1d(d, i, j + 2)
               + b * (2 * j + 1) * self.overlap_1d(d, i, j))
        if j >= 2:
            val = val - 0.5 * j * (j - 1) * self.overlap_1d(d, i, j - 2)
        return val

    def moment_1d(self, d, i, j):
        """Return the 1D first moment about the origin along axis *d*."""
        e1 = self.e[d].get((i, j, 1), 0.0)
        return ((e1 + self.center[:, d] * self.e[d][i, j, 0])
                * np.sqrt(math.pi / self.p))


def _shell_offsets(basis):
    offsets = []
    start = 0
    for shell in basis.shells:
        offsets.append(start)
        start += len(shell.components)
    return offsets


@dataclass(frozen=True)
class IntegralTables:
    """Full-space integral tables in the atomic-orbital basis.

    ``eri`` uses physicist notation.
    ``v_nuclei[c]`` is the attraction matrix of nucleus *c* alone,
    so that ``V == v_nuclei.sum(axis=0)``.
    ``moments[k]`` is the matrix of the position operator component *k*.
    ``enuc`` is the nuclear repulsion energy.
    """
    S: np.ndarray
    T: np.ndarray
    V: np.ndarray
    eri: np.ndarray
    v_nuclei: np.ndarray
    moments: np.ndarray
    enuc: float

    @property
    def h(self):
        """Return the core Hamiltonian ``T + V``."""
        return self.T + self.V

    def __len__(self):
        return self.S.shape[0]

    def attraction(self, atoms):
        """Return the attraction matrix of the nuclei *atoms*."""
        atoms = list(atoms)
        if not atoms:
            return np.zeros_like(self.V)
        return self.v_nuclei[atoms].sum(axis=0)

    def to_mo(self, coefs):
        """Return ``(h, eri)`` transformed by orbital coefficients *coefs*."""
        return transform_one(self.h, coefs), transform_eri(self.eri, coefs)


def transform_one(mat, coefs):
    """Return :math:`C^T M C`."""
    return coefs.T @ mat @ coefs


def transform_eri(eri, coefs):
    """Return a physicist-notation ERI tensor in the basis *coefs*."""
    out = np.tensordot(eri, coefs, axes=([3], [0]))
    out = np.tensordot(out, coefs, axes=([2], [0])).transpose(0, 1, 3, 2)
    out = np.tensordot(coefs, out, axes=([0], [1])).transpose(1, 0, 2, 3)
    out = np.tensordot(coefs, out, axes=([0], [0]))
    return out


def potential_on_points(basis, points):
    """Return the electrostatic potential of every basis product at *points*.

    The result ``pot[i, j, m]`` is
    :math:`\\int \\phi_i(r) \\phi_j(r) / |r - C_m| \\, dr`
    (positive; multiply by :math:`-Z` for a nuclear attraction).

    Parameters
    ----------
    basis : BasisSet
    points : array_like
        Shape ``(npts, 3)``.

    Returns
    -------
    numpy.ndarray
        Shape ``(nbf, nbf, npts)``.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    nbf = len(basis)
    npts = points.shape[0]
    out = np.zeros((nbf, nbf, npts))
    offsets = _shell_offsets(basis)
    shells = basis.shells
    for ia, ib in itertools.combinations_with_replacement(range(len(shells)), 2):
        pair = _ShellPair(shells[ia], shells[ib])
        pref = pair.coefs * 2.0 * math.pi / pair.p
        comps = [(ca, cb, pair.terms(pa, pb))
                 for ca, pa in enumerate(shells[ia].components)
                 for cb, pb in enumerate(shells[ib].components)]
        for start in range(0, npts, _POINT_CHUNK):
            chunk = points[start:start+_POINT_CHUNK]
            pc = pair.center[:, None, :] - chunk[None, :, :]
            rtab = _hermite_r(pair.la + pair.lb, pair.p[:, None], pc)
            for ca, cb, terms in comps:
                accum = 0.0
                for key, coef in terms:
                    accum = accum + coef[:, None] * rtab[key]
                val = pref @ accum
                i = offsets[ia] + ca
                j = offsets[ib] + cb
                out[i, j, start:start+_POINT_CHUNK] = val
                out[j, i, start:start+_POINT_CHUNK] = val
    return out


def _one_electron(basis):
    nbf = len(basis)
    S = np.zeros((nbf, nbf))
    T = np.zeros((nbf, nbf))
    M = np.zeros((3, nbf, nbf))
    offsets = _shell_offsets(basis)
    shells = basis.shells
    for ia, ib in itertools.combinations_with_replacement(range(len(shells)), 2):
        pair = _ShellPair(shells[ia], shells[ib])
        for ca, pa in enumerate(shells[ia].components):
            for cb, pb in enumerate(shells[ib].components):
                s1d = [pair.overlap_1d(d, pa[d], pb[d]) for d in range(3)]
                t1d = [pair.kinetic_1d(d, pa[d], pb[d]) for d in range(3)]
                m1d = [pair.moment_1d(d, pa[d], pb[d]) for d in range(3)]
                sval = s1d[0] * s1d[1] * s1d[2]
                tval = (t1d[0] * s1d[1] * s1d[2]
                        + s1d[0] * t1d[1] * s1d[2]
                        + s1d[0] * s1d[1] * t1d[2])
                i = offsets[ia] + ca
                j = offsets[ib] + cb
                S[i, j] = S[j, i] = pair.coefs @ sval
                T[i, j] = T[j, i] = pair.coefs @ tval
                for d in range(3):
                    mval = m1d[d] * s1d[(d + 1) % 3] * s1d[(d + 2) % 3]
                    M[d, i, j] = M[d, j, i] = pair.coefs @ mval
    return S, T, M


def _electron_repulsion(basis):
    """Return the ERI tensor in chemist notation."""
    nbf = len(basis)
    chem = np.zeros((nbf, nbf, nbf, nbf))
    offsets = _shell_offsets(basis)
    shells = basis.shells
    pairs = list(itertools.combinations_with_replacement(range(len(shells)), 2))
    cache = {key: _ShellPair(shells[key[0]], shells[key[1]]) for key in pairs}

    for n1, key1 in enumerate(pairs):
        for key2 in pairs[:n1+1]:
            bra, ket = cache[key1], cache[key2]
            p = bra.p[:, None]
            q = ket.p[None, :]
            alpha = p * q / (p + q)
            pq = bra.center[:, None, :] - ket.center[None, :, :]
            pref = (2.0 * math.pi ** 2.5 / (p * q * np.sqrt(p + q))
                    * np.outer(bra.coefs, ket.coefs))
            rtab = _hermite_r(bra.la + bra.lb + ket.la + ket.lb, alpha, pq)

            sa, sb = shells[key1[0]], shells[key1[1]]
            sc, sd = shells[key2[0]], shells[key2[1]]
            block = np.zeros((len(sa.components), len(sb.components),
                              len(sc.components), len(sd.components)))
            ket_terms = {}
            for cc, pc_ in enumerate(sc.components):
                for cd, pd_ in enumerate(sd.components):
                    ket_terms[cc, cd] = [
                        (key, (-1) ** sum(key) * coef)
                        for key, coef in ket.terms(pc_, pd_)
                    ]
            for ca, pa in enumerate(sa.components):
                for cb, pb in enumerate(sb.components):
                    bra_terms = bra.terms(pa, pb)
                    for (cc, cd), kterms in ket_terms.items():
                        accum = 0.0
                        for (t, u, v), e1 in bra_terms:
                            for (tau, nu, phi), e2 in kterms:
                                accum = accum + (e1[:, None] * e2[None, :]
                                                 * rtab[t+tau, u+nu, v+phi])
                        block[ca, cb, cc, cd] = np.sum(pref * accum)

            ia = [offsets[key1[0]] + k for k in range(len(sa.components))]
            ib = [offsets[key1[1]] + k for k in range(len(sb.components))]
            ic = [offsets[key2[0]] + k for k in range(len(sc.components))]
            id_ = [offsets[key2[1]] + k for k in range(len(sd.components))]
            for perm, (w, x, y, z) in (
                    ((0, 1, 2, 3), (ia, ib, ic, id_)),
                    ((1, 0, 2, 3), (ib, ia, ic, id_)),
                    ((0, 1, 3, 2), (ia, ib, id_, ic)),
                    ((1, 0, 3, 2), (ib, ia, id_, ic)),
                    ((2, 3, 0, 1), (ic, id_, ia, ib)),
                    ((3, 2, 0, 1), (id_, ic, ia, ib)),
                    ((2, 3, 1, 0), (ic, id_, ib, ia)),
                    ((3, 2, 1, 0), (id_, ic, ib, ia)),
                ):
                chem[np.ix_(w, x, y, z)] = block.transpose(perm)
    return chem


def compute_integrals(basis, molecule):
    """Return the full-space :class:`IntegralTables`.

    Parameters
    ----------
    basis : BasisSet
    molecule : Molecule

    Returns
    -------
    IntegralTables

    Raises
    ------
    DegenerateBasisError
        The smallest eigenvalue of the overlap matrix is below
        :data:`DEGENERATE_THRESHOLD`.
    """
    S, T, M = _one_electron(basis)
    smin = np.linalg.eigvalsh(S).min()
    if smin < DEGENERATE_THRESHOLD:
        fstr = "overlap matrix is near singular (smallest eigenvalue {:.3e})"
        raise DegenerateBasisError(fstr.format(smin))

    pot = potential_on_points(basis, molecule.coords)
    v_nuclei = -np.moveaxis(pot, 2, 0) * molecule.charges[:, None, None]
    V = v_nuclei.sum(axis=0)

    chem = _electron_repulsion(basis)
    eri = chem.transpose(0, 2, 1, 3).copy()

    _log.debug("computed integrals: %d functions, %d nuclei",
               len(basis), len(molecule))
    return IntegralTables(S, T, V, eri, v_nuclei, M,
                          molecule.nuclear_repulsion())


def format_arrays(named):
    """Iterate through labeled text lines for a mapping of named arrays.

    Every line holds the array name, the element index tuple,
    and the value with full double precision.
    """
    for name, arr in named.items():
        arr = np.asarray(arr)
        for idx in np.ndindex(*arr.shape):
            yield "{} {} {:.17g}".format(name, " ".join(map(str, idx)), arr[idx])


def dump_tables(tables, path, extra=None):
    """Write integral tables (and optional *extra* named arrays) to *path*.

    This is a debugging format, not a stable interface.
    """
    named = {
        "S": tables.S,
        "T": tables.T,
        "V": tables.V,
        "ERI": tables.eri,
    }
    if extra:
        named.update(extra)
    with open(path, "w", encoding="utf-8") as fout:
        for line in format_arrays(named):
            print(line, file=fout)
