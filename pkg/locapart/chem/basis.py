"""
The :mod:`locapart.chem.basis` module defines molecular geometries and
contracted Cartesian Gaussian basis sets,
and evaluates basis functions at arbitrary points.

All quantities are in atomic units (bohr, hartree).

Interface Functions:

* :func:`build_molecule` --- Return a validated :class:`Molecule`
* :func:`build_basis` --- Return a :class:`BasisSet` from the built-in registry
* :func:`eval_basis` --- Evaluate values, gradients and Laplacians
* :func:`h_atom` --- One hydrogen atom in region ``A``
* :func:`h2` --- Hydrogen molecule along *z*, atoms in regions ``A`` and ``B``
* :func:`h2_dimer` --- Two hydrogen molecules in regions ``A`` and ``B``

Interface Classes:

* :class:`Molecule`
* :class:`Shell`
* :class:`BasisSet`
* :class:`BasisValues`
"""

import collections
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

# Minimum distance between two nuclei before they count as coincident
_COINCIDENT = 1e-8

# Nuclear charge of each element symbol
SYMBOLS = {"H": 1.0, "He": 2.0}

# Built-in basis registry.
# Each entry maps a nuclear charge to a list of shells:
# (angular momentum, exponents, contraction coefficients).
# Coefficients multiply *normalized* primitives.
# sto-3g and the 2p shell of sto-3g-p come from the three-Gaussian
# expansions of Slater functions at zeta = 1,
# scaled by zeta**2 (1.24 for the 1s of hydrogen, 1.0 for 2p).
_STO3G_1S = (
    0,
    (3.42525091, 0.62391373, 0.16885540),
    (0.15432897, 0.53532814, 0.44463454),
)
_STO3G_2P = (
    1,
    (0.99420300, 0.23103100, 0.07513860),
    (0.15591600, 0.60768400, 0.39195700),
)
_631G_1S_INNER = (
    0,
    (18.7311370, 2.8253937, 0.6401217),
    (0.03349460, 0.23472695, 0.81375733),
)
_631G_1S_OUTER = (
    0,
    (0.1612778, ),
    (1.0, ),
)

REGISTRY = {
    "sto-3g": {1.0: [_STO3G_1S]},
    "sto-3g-p": {1.0: [_STO3G_1S, _STO3G_2P]},
    "6-31g": {1.0: [_631G_1S_INNER, _631G_1S_OUTER]},
}

# Cartesian powers of each shell component
_COMPONENTS = {
    0: [(0, 0, 0)],
    1: [(1, 0, 0), (0, 1, 0), (0, 0, 1)],
}

_LABELS = {
    (0, 0, 0): "s",
    (1, 0, 0): "px",
    (0, 1, 0): "py",
    (0, 0, 1): "pz",
}


class Error(Exception):
    """An error happened while building a molecule or basis set."""


@dataclass(frozen=True)
class Molecule:
    """Nuclear framework of a molecule.

    ``charges`` is an ``(n, )`` array of positive nuclear charges,
    ``coords`` an ``(n, 3)`` array of positions in bohr,
    and ``regions`` the subsystem label of every nucleus.

    Do **NOT** use the constructor directly;
    use :func:`build_molecule`, which validates its input.
    """
    charges: np.ndarray
    coords: np.ndarray
    regions: tuple

    def __len__(self):
        return len(self.charges)

    @property
    def region_labels(self):
        """Return the region labels in order of first appearance."""
        return tuple(dict.fromkeys(self.regions))

    def region_atoms(self, label):
        """Return the indices of the nuclei assigned to region *label*."""
        return [i for i, r in enumerate(self.regions) if r == label]

    def centroid(self, label):
        """Return the geometric centroid of the nuclei in region *label*."""
        return self.coords[self.region_atoms(label)].mean(axis=0)

    def nuclear_repulsion(self):
        """Return the nuclear repulsion energy."""
        enuc = 0.0
        for i in range(len(self)):
            for j in range(i):
                dist = np.linalg.norm(self.coords[i] - self.coords[j])
                enuc += self.charges[i] * self.charges[j] / dist
        return enuc

    def translated(self, shift):
        """Return a copy rigidly translated by *shift*."""
        shift = np.asarray(shift, dtype=float)
        return Molecule(self.charges.copy(), self.coords + shift, self.regions)

    def subset(self, label):
        """Return the isolated fragment made of region *label*."""
        idx = self.region_atoms(label)
        regions = tuple(self.regions[i] for i in idx)
        return Molecule(self.charges[idx].copy(), self.coords[idx].copy(),
                        regions)


def build_molecule(nuclei):
    """Return a validated :class:`Molecule`.

    Parameters
    ----------
    nuclei : iterable
        One ``(charge, position, region)`` item per nucleus.
        The charge may be a number or an element symbol ("H", "He"),
        the position is a 3-vector in bohr,
        and the region is a non-empty label.

    Returns
    -------
    Molecule

    For example, the hydrogen molecule at its equilibrium bond length:

    >>> mol = build_molecule([("H", (0, 0, 0), "A"), ("H", (0, 0, 1.4), "B")])
    >>> mol.region_labels
    ('A', 'B')
    """
    charges = []
    coords = []
    regions = []
    for i, item in enumerate(nuclei):
        try:
            charge, position, region = item
        except (TypeError, ValueError) as exc:
            raise Error(f"nucleus {i}: expected (charge, position, region)") from exc
        if isinstance(charge, str):
            try:
                charge = SYMBOLS[charge]
            except KeyError as exc:
                raise Error(f"nucleus {i}: unknown element {charge!r}") from exc
        charge = float(charge)
        if charge <= 0.0:
            raise Error(f"nucleus {i}: expected charge > 0, got {charge}")
        position = np.asarray(position, dtype=float)
        if position.shape != (3, ):
            raise Error(f"nucleus {i}: expected a 3-vector position")
        if region is None or str(region) == "":
            raise Error(f"nucleus {i}: missing region label")
        for j, other in enumerate(coords):
            if np.linalg.norm(position - other) < _COINCIDENT:
                raise Error(f"nuclei {j} and {i} have the same position")
        charges.append(charge)
        coords.append(position)
        regions.append(str(region))
    if not charges:
        raise Error("expected at least one nucleus")
    return Molecule(np.array(charges), np.array(coords), tuple(regions))


def h_atom():
    """Return a single hydrogen atom at the origin, in region ``A``."""
    return build_molecule([("H", (0.0, 0.0, 0.0), "A")])


def h2(bond=1.4):
    """Return H2 along *z*, with atom ``A`` at the origin."""
    return build_molecule([
        ("H", (0.0, 0.0, 0.0), "A"),
        ("H", (0.0, 0.0, bond), "B"),
    ])


def h2_dimer(separation, bond=1.4):
    """Return two H2 molecules whose centroids are *separation* apart.

    Both bonds are parallel to *x*;
    molecule ``A`` is centred at the origin and molecule ``B`` on the
    positive *z* axis.
    """
    half = 0.5 * bond
    return build_molecule([
        ("H", (-half, 0.0, 0.0), "A"),
        ("H", (half, 0.0, 0.0), "A"),
        ("H", (-half, 0.0, separation), "B"),
        ("H", (half, 0.0, separation), "B"),
    ])


def primitive_norm(alpha, ell):
    r"""Return the normalization constant of a Cartesian Gaussian primitive.

    For :math:`\ell \le 1` every Cartesian component has the same constant
    :math:`(2\alpha/\pi)^{3/4} (4\alpha)^{\ell/2}`.
    """
    alpha = np.asarray(alpha, dtype=float)
    return (2.0 * alpha / math.pi) ** 0.75 * (4.0 * alpha) ** (0.5 * ell)


def _self_overlap(ell, exps, coefs):
    """Return the self-overlap of a contraction of normalized primitives."""
    accum = 0.0
    for a, ca in zip(exps, coefs):
        for b, cb in zip(exps, coefs):
            p = a + b
            s = (math.pi / p) ** 1.5 * (0.5 / p) ** ell
            accum += ca * cb * primitive_norm(a, ell) * primitive_norm(b, ell) * s
    return accum


@dataclass(frozen=True)
class Shell:
    """A contracted shell on one center.

    ``coefs`` multiply unnormalized primitives :math:`x^l y^m z^n e^{-\\alpha r^2}`:
    they already include primitive and contraction normalization.
    """
    center: np.ndarray
    ell: int
    exps: np.ndarray
    coefs: np.ndarray
    atom: int

    @property
    def components(self):
        """Return the Cartesian powers of this shell's functions."""
        return _COMPONENTS[self.ell]


class BasisSet:
    """Contracted Gaussian basis set with s and p shells.

    Basis functions are ordered shell by shell;
    a p shell contributes px, py, pz in that order.
    """
    def __init__(self, name, shells):
        self.name = name
        self.shells = tuple(shells)
        funcs = []
        for ish, shell in enumerate(self.shells):
            for powers in shell.components:
                funcs.append((ish, powers))
        self.functions = tuple(funcs)

    def __len__(self):
        return len(self.functions)

    @cached_property
    def labels(self):
        """Return a readable label for every basis function."""
        return tuple(f"{self.shells[ish].atom}{_LABELS[powers]}"
                     for ish, powers in self.functions)

    @cached_property
    def function_atoms(self):
        """Return the atom index of every basis function."""
        return np.array([self.shells[ish].atom for ish, _ in self.functions])

    def atom_functions(self, atoms):
        """Return the indices of the functions centred on *atoms*."""
        atoms = set(atoms)
        return [i for i, a in enumerate(self.function_atoms) if a in atoms]

    def find(self, atom, label):
        """Return the index of the first function on *atom* named *label*.

        Labels are ``s``, ``px``, ``py`` and ``pz``.
        """
        for i, (ish, powers) in enumerate(self.functions):
            if self.shells[ish].atom == atom and _LABELS[powers] == label:
                return i
        raise Error(f"no {label} function on atom {atom}")

    def translated(self, shift):
        """Return a copy with every shell center translated by *shift*."""
        shift = np.asarray(shift, dtype=float)
        shells = [Shell(s.center + shift, s.ell, s.exps, s.coefs, s.atom)
                  for s in self.shells]
        return BasisSet(self.name, shells)


def build_basis(molecule, basis_name):
    """Return the basis set *basis_name* placed on every nucleus.

    Parameters
    ----------
    molecule : Molecule
    basis_name : str
        One of ``sto-3g`` (minimal s), ``sto-3g-p`` (s+p),
        or ``6-31g`` (split-valence s).

    Returns
    -------
    BasisSet
    """
    try:
        table = REGISTRY[basis_name]
    except KeyError as exc:
        fstr = "unknown basis {!r}, expected one of {}"
        raise Error(fstr.format(basis_name, sorted(REGISTRY))) from exc
    shells = []
    for atom, (charge, center) in enumerate(zip(molecule.charges,
                                                molecule.coords)):
        try:
            entries = table[float(charge)]
        except KeyError as exc:
            fstr = "basis {!r} has no entry for nuclear charge {}"
            raise Error(fstr.format(basis_name, charge)) from exc
        for ell, exps, coefs in entries:
            exps = np.array(exps, dtype=float)
            coefs = np.array(coefs, dtype=float)
            scale = 1.0 / math.sqrt(_self_overlap(ell, exps, coefs))
            coefs = coefs * scale * primitive_norm(exps, ell)
            shells.append(Shell(center.copy(), ell, exps, coefs, atom))
    return BasisSet(basis_name, shells)


BasisValues = collections.namedtuple("BasisValues",
                                     ["values", "gradients", "laplacians"])
BasisValues.__doc__ = """\
Basis functions evaluated on points.

``values`` and ``laplacians`` have shape ``(nbf, npts)``,
``gradients`` has shape ``(nbf, npts, 3)``.
"""


def eval_basis(basis, points, derivs=True):
    r"""Evaluate every basis function on *points*.

    Derivatives are analytic:
    for a primitive :math:`P(\mathbf r) e^{-\alpha r^2}` with
    :math:`P \in \{1, x, y, z\}`,

    .. math::
       \nabla^2 \left(P e^{-\alpha r^2}\right)
       = \left(4 \alpha^2 r^2 - 2 \alpha (2 \ell + 3)\right) P e^{-\alpha r^2}

    Parameters
    ----------
    basis : BasisSet
    points : array_like
        Shape ``(npts, 3)``.
    derivs : bool, optional
        When False, skip gradients and Laplacians (returned as None).

    Returns
    -------
    BasisValues
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    npts = points.shape[0]
    nbf = len(basis)
    values = np.zeros((nbf, npts))
    grads = np.zeros((nbf, npts, 3)) if derivs else None
    laps = np.zeros((nbf, npts)) if derivs else None

    ibf = 0
    for shell in basis.shells:
        rel = points - shell.center
        r2 = np.einsum("ij,ij->i", rel, rel)
        # radial parts, one row per primitive
        expo = np.exp(-np.outer(shell.exps, r2))
        radial = shell.coefs @ expo
        if derivs:
            dradial = -2.0 * (shell.coefs * shell.exps) @ expo
            lap_s = ((4.0 * shell.coefs * shell.exps ** 2) @ expo * r2
                     - 2.0 * (2 * shell.ell + 3) * (shell.coefs * shell.exps) @ expo)
        for powers in shell.components:
            if shell.ell == 0:
                values[ibf] = radial
                if derivs:
                    grads[ibf] = dradial[:, None] * rel
                    laps[ibf] = lap_s
            else:
                k = powers.index(1)
                poly = rel[:, k]
                values[ibf] = poly * radial
                if derivs:
                    grads[ibf] = (dradial * poly)[:, None] * rel
                    grads[ibf, :, k] += radial
                    laps[ibf] = poly * lap_s
            ibf += 1
    return BasisValues(values, grads, laps)
