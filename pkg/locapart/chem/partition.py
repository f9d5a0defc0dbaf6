"""
Spatial partitions and region-restricted integrals

A partition divides space into sharp regions, one per subsystem.
The region projector is the indicator function of a region;
the two-electron projector of a region pair is the symmetrized product

.. math::
   \\Theta_{A\\alpha}(1, 2) = \\frac{1}{2} \\left(
       \\Theta_A(1) \\Theta_\\alpha(2) + \\Theta_\\alpha(1) \\Theta_A(2) \\right)

Interface Functions:
    build_partition
    region_of
    partitioned_one_electron
    partitioned_two_electron
    build_partitioned_integrals
    nuclear_repulsion_share

Interface Classes:
    Partition
    RegionTables
    PartitionedIntegrals

Exceptions:
    Error
"""

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from locapart.chem.basis import eval_basis
from locapart.chem.grid import build_grid
from locapart.chem.integrals import potential_on_points, transform_eri, transform_one

_log = logging.getLogger(__name__)

# Points equidistant within this tolerance go to the lowest region index
TIE = 1e-12

# Region centroids closer than this are considered coincident
_COINCIDENT = 1e-8

_ONE_CHUNK = 20000
_PAIR_CHUNK = 256


class Error(Exception):
    """An error happened while building a partition."""


@dataclass(frozen=True)
class Partition:
    """Sharp spatial partition.

    ``rule`` is ``voronoi`` (cells of the region centroids)
    or ``plane`` (a dividing plane; exactly two regions).
    For a plane, points with ``normal @ x <= offset`` belong to
    the first region.
    """
    labels: tuple
    centroids: np.ndarray
    rule: str = "voronoi"
    normal: np.ndarray = None
    offset: float = None

    def __len__(self):
        return len(self.labels)

    def index(self, label):
        """Return the index of region *label*."""
        try:
            return self.labels.index(label)
        except ValueError as exc:
            raise Error(f"unknown region {label!r}") from exc

    @property
    def plane(self):
        """Return ``(normal, offset)`` of the dividing plane of two regions.

        For a Voronoi partition this is the perpendicular bisector of the
        two centroids, with the normal pointing from the first region
        towards the second.
        """
        if len(self) != 2:
            raise Error("a dividing plane needs exactly two regions")
        if self.rule == "plane":
            return self.normal, self.offset
        axis = self.centroids[1] - self.centroids[0]
        normal = axis / np.linalg.norm(axis)
        midpoint = 0.5 * (self.centroids[0] + self.centroids[1])
        return normal, float(normal @ midpoint)

    def assign(self, points):
        """Return the region index of every point in an ``(npts, 3)`` array."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if len(self) == 1:
            return np.zeros(len(points), dtype=int)
        if self.rule == "plane":
            side = points @ self.normal - self.offset
            return (side > TIE).astype(int)
        diff = points[:, None, :] - self.centroids[None, :, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        near = dist <= dist.min(axis=1, keepdims=True) + TIE
        return np.argmax(near, axis=1)

    def mask(self, points, label):
        """Return the indicator of region *label* at *points*."""
        return self.assign(points) == self.index(label)


def build_partition(molecule, rule="voronoi", normal=None, offset=None):
    """Return the :class:`Partition` of *molecule* into its regions.

    Parameters
    ----------
    molecule : Molecule
    rule : str
        ``voronoi`` or ``plane``.
    normal, offset : optional
        Dividing plane for the ``plane`` rule.
        The normal need not be normalized; it must point from the
        first region towards the second.

    Returns
    -------
    Partition
    """
    labels = molecule.region_labels
    centroids = np.array([molecule.centroid(label) for label in labels])
    for a, b in itertools.combinations(range(len(labels)), 2):
        if np.linalg.norm(centroids[a] - centroids[b]) < _COINCIDENT:
            fstr = "regions {!r} and {!r} have coincident centroids"
            raise Error(fstr.format(labels[a], labels[b]))
    if rule == "voronoi":
        return Partition(labels, centroids)
    if rule == "plane":
        if len(labels) != 2:
            raise Error("the plane rule needs exactly two regions")
        if normal is None:
            raise Error("the plane rule needs a normal")
        normal = np.asarray(normal, dtype=float)
        if normal.shape != (3, ) or np.linalg.norm(normal) == 0.0:
            raise Error("expected a non-zero 3-vector normal")
        normal = normal / np.linalg.norm(normal)
        if offset is None:
            offset = float(normal @ (0.5 * (centroids[0] + centroids[1])))
        return Partition(labels, centroids, "plane", normal, float(offset))
    raise Error(f"unknown partition rule {rule!r}")


def region_of(point, partition):
    """Return the region index of a single point.

    Boundary points go to the lowest-index region.
    """
    return int(partition.assign(point)[0])


@dataclass(frozen=True)
class RegionTables:
    """One-electron tables restricted to one region.

    ``T`` is :math:`\\langle i|\\Theta_A (-\\nabla^2/2)|j\\rangle`,
    which is not symmetric in general.
    ``v_nuclei[c]`` is the attraction to nucleus *c* alone.
    """
    S: np.ndarray
    T: np.ndarray
    v_nuclei: np.ndarray

    @property
    def V(self):
        """Return the restricted attraction to all nuclei."""
        return self.v_nuclei.sum(axis=0)

    @property
    def h(self):
        """Return the restricted core Hamiltonian."""
        return self.T + self.V

    def attraction(self, atoms):
        """Return the restricted attraction to the nuclei *atoms*."""
        atoms = list(atoms)
        if not atoms:
            return np.zeros_like(self.S)
        return self.v_nuclei[atoms].sum(axis=0)

    def to_mo(self, coefs):
        """Return the tables transformed by orbital coefficients *coefs*."""
        vn = np.array([transform_one(v, coefs) for v in self.v_nuclei])
        return RegionTables(transform_one(self.S, coefs),
                            transform_one(self.T, coefs), vn)


def partitioned_one_electron(basis, molecule, grid, partition):
    """Return a mapping of region label to :class:`RegionTables`.

    Every quantity is a weighted grid sum over the points of one region,
    with the nuclear attraction evaluated pointwise.
    """
    regions = partition.assign(grid.points)
    nbf = len(basis)
    nreg = len(partition)
    natom = len(molecule)
    S = np.zeros((nreg, nbf, nbf))
    T = np.zeros((nreg, nbf, nbf))
    VN = np.zeros((nreg, natom, nbf, nbf))

    for start in range(0, len(grid), _ONE_CHUNK):
        pts = grid.points[start:start+_ONE_CHUNK]
        wts = grid.weights[start:start+_ONE_CHUNK]
        reg = regions[start:start+_ONE_CHUNK]
        vals = eval_basis(basis, pts)
        dist = np.linalg.norm(pts[:, None, :] - molecule.coords[None, :, :], axis=2)
        vnuc = -molecule.charges[None, :] / dist
        for r in range(nreg):
            sel = reg == r
            if not sel.any():
                continue
            phi = vals.values[:, sel]
            wphi = phi * wts[sel]
            S[r] += wphi @ phi.T
            T[r] += wphi @ (-0.5 * vals.laplacians[:, sel]).T
            for c in range(natom):
                VN[r, c] += (wphi * vnuc[sel, c]) @ phi.T
        _log.debug("one-electron chunk %d/%d", start // _ONE_CHUNK + 1,
                   -(-len(grid) // _ONE_CHUNK))

    return {label: RegionTables(S[r], T[r], VN[r])
            for r, label in enumerate(partition.labels)}


def _cross_region(wrho_a, pts_a, wrho_b, pts_b):
    """Return the pair-density matrix of electron 1 in *a*, electron 2 in *b*."""
    out = np.zeros((wrho_a.shape[0], wrho_b.shape[0]))
    rhs = wrho_b.T
    for start in range(0, len(pts_a), _PAIR_CHUNK):
        chunk = pts_a[start:start+_PAIR_CHUNK]
        dist2 = np.zeros((len(chunk), len(pts_b)))
        for d in range(3):
            dist2 += (chunk[:, d, None] - pts_b[None, :, d]) ** 2
        kern = np.zeros_like(dist2)
        # coincident pairs are excluded
        np.divide(1.0, np.sqrt(dist2), out=kern, where=dist2 > 0.0)
        out += wrho_a[:, start:start+_PAIR_CHUNK] @ (kern @ rhs)
    return out


def partitioned_two_electron(basis, grid, partition, pair=None):
    """Return region-pair restricted electron repulsion tensors.

    The result maps ``(A, alpha)`` label pairs (both orders) to tensors in
    physicist notation, :math:`\\langle ij|\\Theta_{A\\alpha} g|kl\\rangle`.
    When *pair* is given, return only that tensor.

    Restricting only electron 1 to a region uses the analytic potential of
    the electron-2 density at the grid points.
    Cross-region double sums are numerical;
    the same-region block follows from the identity
    :math:`D_{AA} = P_A - \\sum_{\\beta \\ne A} D_{A\\beta}`.
    """
    regions = partition.assign(grid.points)
    nbf = len(basis)
    nreg = len(partition)
    iu, ku = np.triu_indices(nbf)
    pidx = np.zeros((nbf, nbf), dtype=int)
    pidx[iu, ku] = np.arange(len(iu))
    pidx[ku, iu] = np.arange(len(iu))

    phi = eval_basis(basis, grid.points, derivs=False).values
    wrho = phi[iu] * phi[ku] * grid.weights
    pot = potential_on_points(basis, grid.points)[iu, ku]

    sels = [regions == r for r in range(nreg)]
    half = [wrho[:, s] @ pot[:, s].T for s in sels]

    dens = {}
    for a, b in itertools.combinations(range(nreg), 2):
        dab = _cross_region(wrho[:, sels[a]], grid.points[sels[a]],
                            wrho[:, sels[b]], grid.points[sels[b]])
        dens[a, b] = dab
        dens[b, a] = dab.T
        _log.debug("cross-region block %s/%s done",
                   partition.labels[a], partition.labels[b])
    for a in range(nreg):
        daa = half[a] - sum(dens[a, b] for b in range(nreg) if b != a)
        dens[a, a] = 0.5 * (daa + daa.T)

    expand = (pidx[:, :, None, None], pidx[None, None, :, :])
    out = {}
    for a in range(nreg):
        for b in range(nreg):
            if a == b:
                mat = dens[a, a]
            else:
                mat = 0.5 * (dens[a, b] + dens[b, a])
            chem = mat[expand]
            key = (partition.labels[a], partition.labels[b])
            out[key] = chem.transpose(0, 2, 1, 3).copy()

    if pair is not None:
        try:
            return out[tuple(pair)]
        except KeyError as exc:
            raise Error(f"unknown region pair {pair!r}") from exc
    return out


@dataclass(frozen=True)
class PartitionedIntegrals:
    """Region-restricted integral tables.

    ``regions`` maps a label to its :class:`RegionTables`;
    ``pairs`` maps ``(A, alpha)`` to a two-electron tensor.
    ``tau`` and ``tau_2e`` are the documented tolerances of the grids.
    """
    labels: tuple
    regions: dict
    pairs: dict
    tau: float
    tau_2e: float

    def __getitem__(self, label):
        try:
            return self.regions[label]
        except KeyError as exc:
            raise Error(f"unknown region {label!r}") from exc

    def kernel(self, label):
        """Return the two-electron kernel of region *label*.

        This is the sum over all partner regions of the pair tensors.
        """
        if label not in self.regions:
            raise Error(f"unknown region {label!r}")
        return sum(self.pairs[label, other] for other in self.labels)

    def total_overlap(self):
        return sum(t.S for t in self.regions.values())

    def total_core(self):
        return sum(t.h for t in self.regions.values())

    def total_eri(self):
        return sum(self.pairs.values())

    def to_mo(self, coefs):
        """Return all tables transformed by orbital coefficients *coefs*."""
        regions = {k: v.to_mo(coefs) for k, v in self.regions.items()}
        pairs = {k: transform_eri(v, coefs) for k, v in self.pairs.items()}
        return PartitionedIntegrals(self.labels, regions, pairs,
                                    self.tau, self.tau_2e)


def build_partitioned_integrals(basis, molecule, partition,
                                resolution="default", scheme="becke"):
    """Build both grids and return the :class:`PartitionedIntegrals`."""
    grid1 = build_grid(molecule, resolution, scheme=scheme)
    grid2 = build_grid(molecule, resolution, two_electron=True, scheme=scheme)
    _log.info("partitioned integrals: %d one-electron points, "
              "%d two-electron points", len(grid1), len(grid2))
    regions = partitioned_one_electron(basis, molecule, grid1, partition)
    pairs = partitioned_two_electron(basis, grid2, partition)
    return PartitionedIntegrals(partition.labels, regions, pairs,
                                grid1.tau, grid2.tau)


def nuclear_repulsion_share(molecule, partition):
    """Return the nuclear repulsion apportioned to every region.

    Nuclear pairs inside one region count fully to it;
    pairs across two regions count one half to each.
    """
    owner = partition.assign(molecule.coords)
    share = {label: 0.0 for label in partition.labels}
    for i, j in itertools.combinations(range(len(molecule)), 2):
        dist = np.linalg.norm(molecule.coords[i] - molecule.coords[j])
        energy = molecule.charges[i] * molecule.charges[j] / dist
        la = partition.labels[owner[i]]
        lb = partition.labels[owner[j]]
        share[la] += 0.5 * energy
        share[lb] += 0.5 * energy
    return share
