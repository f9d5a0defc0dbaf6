"""
Molecular quadrature grids

Atom-centred grids are products of a mapped Gauss-Chebyshev radial rule
and a Gauss-Legendre by uniform-azimuth angular rule,
merged with Becke's smooth fuzzy-cell weights.
A uniform Cartesian box is available as a simple alternative.

Interface Functions:
    build_grid
    tier

Interface Classes:
    Grid
    GridTier
"""

import collections
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.polynomial import legendre

_log = logging.getLogger(__name__)

# Becke radial map parameter (bohr)
RADIAL_SCALE = 1.0

# Points closer than this to a nucleus are dropped
COINCIDENT = 1e-10

_CHUNK = 20000

GridTier = collections.namedtuple(
    "GridTier",
    ["radial", "n_theta", "radial_2e", "n_theta_2e", "tau", "tau_2e"],
)

TIERS = {
    "coarse": GridTier(40, 12, 24, 8, 1e-3, 1e-2),
    "default": GridTier(100, 24, 40, 12, 1e-6, 1e-3),
    "fine": GridTier(150, 32, 60, 16, 1e-8, 1e-4),
}


def tier(resolution):
    """Return the :class:`GridTier` for a tier name or explicit counts.

    Explicit counts are a mapping with any of the :class:`GridTier` fields;
    missing fields are taken from the ``default`` tier.
    """
    if isinstance(resolution, GridTier):
        return resolution
    if isinstance(resolution, str):
        try:
            return TIERS[resolution]
        except KeyError as exc:
            fstr = "unknown grid tier {!r}, expected one of {}"
            raise ValueError(fstr.format(resolution, sorted(TIERS))) from exc
    base = resolution.get("tier", "default")
    fields = {k: v for k, v in resolution.items() if k != "tier"}
    unknown = set(fields) - set(GridTier._fields)
    if unknown:
        raise ValueError(f"unknown grid parameters: {sorted(unknown)}")
    return TIERS[base]._replace(**fields)


@dataclass(frozen=True)
class Grid:
    """Quadrature grid.

    ``points`` has shape ``(npts, 3)`` and ``weights`` shape ``(npts, )``.
    ``regions`` holds the region index of every point once a partition
    has labeled the grid (see :meth:`labeled`), otherwise None.
    """
    points: np.ndarray
    weights: np.ndarray
    scheme: str
    params: dict = field(default_factory=dict)
    tau: float = 1e-6
    regions: np.ndarray = None

    def __len__(self):
        return len(self.weights)

    def labeled(self, partition):
        """Return a copy carrying the region index of every point."""
        return replace(self, regions=partition.assign(self.points))

    def integrate(self, values):
        """Return the weighted sum of *values* over the grid."""
        return np.asarray(values) @ self.weights


def _radial(nrad):
    """Return Becke-mapped radial nodes and weights including r**2."""
    i = np.arange(1, nrad + 1)
    theta = i * math.pi / (nrad + 1)
    x = np.cos(theta)
    r = RADIAL_SCALE * (1.0 + x) / (1.0 - x)
    dr = 2.0 * RADIAL_SCALE / (1.0 - x) ** 2
    w = math.pi / (nrad + 1) * np.sin(theta) * dr * r * r
    return r, w


def _angular(n_theta):
    """Return unit vectors and weights of the product angular rule."""
    n_phi = 2 * n_theta
    cost, wt = legendre.leggauss(n_theta)
    phi = (np.arange(n_phi) + 0.5) * 2.0 * math.pi / n_phi
    sint = np.sqrt(1.0 - cost * cost)
    dirs = np.stack([
        np.outer(sint, np.cos(phi)).ravel(),
        np.outer(sint, np.sin(phi)).ravel(),
        np.repeat(cost, n_phi),
    ], axis=1)
    weights = np.repeat(wt, n_phi) * (2.0 * math.pi / n_phi)
    return dirs, weights


def _becke_step(mu):
    for _ in range(3):
        mu = 1.5 * mu - 0.5 * mu ** 3
    return 0.5 * (1.0 - mu)


def _becke_weights(points, coords, owner):
    """Return the fuzzy-cell weight of atom *owner* at every point."""
    natom = len(coords)
    if natom == 1:
        return np.ones(len(points))
    out = np.empty(len(points))
    rab = np.linalg.norm(coords[:, None, :] - coords[None, :, :], axis=2)
    for start in range(0, len(points), _CHUNK):
        chunk = points[start:start+_CHUNK]
        dist = np.linalg.norm(chunk[:, None, :] - coords[None, :, :], axis=2)
        cell = np.ones((len(chunk), natom))
        for a in range(natom):
            for b in range(natom):
                if a != b:
                    mu = (dist[:, a] - dist[:, b]) / rab[a, b]
                    cell[:, a] *= _becke_step(mu)
        out[start:start+_CHUNK] = cell[:, owner] / cell.sum(axis=1)
    return out


def _drop_coincident(points, weights, coords):
    keep = np.ones(len(points), dtype=bool)
    for center in coords:
        keep &= np.linalg.norm(points - center, axis=1) > COINCIDENT
    ndrop = int((~keep).sum())
    if ndrop:
        _log.info("dropped %d grid points coincident with a nucleus", ndrop)
    return points[keep], weights[keep]


def _becke_grid(molecule, nrad, n_theta):
    r, wr = _radial(nrad)
    dirs, wa = _angular(n_theta)
    points = []
    weights = []
    for owner, center in enumerate(molecule.coords):
        pts = center + (r[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
        wts = np.outer(wr, wa).ravel()
        wts = wts * _becke_weights(pts, molecule.coords, owner)
        points.append(pts)
        weights.append(wts)
    return np.concatenate(points), np.concatenate(weights)


def _cartesian_grid(molecule, spacing, padding):
    lo = molecule.coords.min(axis=0) - padding
    hi = molecule.coords.max(axis=0) + padding
    axes = [np.arange(lo[d], hi[d] + 0.5 * spacing, spacing) for d in range(3)]
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=1)
    weights = np.full(len(points), spacing ** 3)
    return points, weights


def build_grid(molecule, resolution="default", two_electron=False,
               scheme="becke", spacing=0.2, padding=8.0):
    """Return a quadrature :class:`Grid` for *molecule*.

    Parameters
    ----------
    molecule : Molecule
    resolution : str or mapping
        Tier name (``coarse``, ``default``, ``fine``) or explicit counts.
    two_electron : bool
        Use the (smaller) two-electron radial and angular counts.
    scheme : str
        ``becke`` (atom-centred) or ``cartesian`` (uniform box).
    spacing, padding : float
        Cartesian box spacing and padding beyond the nuclei (bohr).

    Returns
    -------
    Grid
    """
    tr = tier(resolution)
    if scheme == "becke":
        nrad = tr.radial_2e if two_electron else tr.radial
        n_theta = tr.n_theta_2e if two_electron else tr.n_theta
        if nrad < 1 or n_theta < 1:
            raise ValueError("expected positive radial and angular counts")
        points, weights = _becke_grid(molecule, nrad, n_theta)
        params = {"radial": nrad, "n_theta": n_theta, "n_phi": 2 * n_theta}
    elif scheme == "cartesian":
        if spacing <= 0.0:
            raise ValueError("expected spacing > 0")
        points, weights = _cartesian_grid(molecule, spacing, padding)
        params = {"spacing": spacing, "padding": padding}
    else:
        raise ValueError(f"unknown grid scheme {scheme!r}")

    points, weights = _drop_coincident(points, weights, molecule.coords)
    tau = tr.tau_2e if two_electron else tr.tau
    _log.debug("built %s grid with %d points (two_electron=%s)",
               scheme, len(weights), two_electron)
    return Grid(points, weights, scheme, params, tau)
