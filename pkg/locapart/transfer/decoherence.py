"""
Dephasing of site energies in a vibronic superposition

The system is an equal superposition of two Born-Oppenheimer states,
each a product of an electronic state of H2 at bond length R and the
harmonic ground vibrational state of its surface.
The localized energy of a region then oscillates at the vibronic gap
about the mean of the two surface energies.
A Gaussian distribution of gaps (elastic collisions) damps the oscillation
with the envelope :math:`e^{-\\sigma^2 t^2 / 2}`.

Interface Functions:
    vibronic_site_terms
    condon_delta
    averaged_energy
    decoherence_series

Interface Classes:
    VibronicModel
    DecoherenceParams
    H2Surfaces
    SiteTerms
    EnsembleChannel

Exceptions:
    Error
    StateOrderError
"""

import bisect
import collections
import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import hermite

from locapart.chem.basis import build_basis, h2
from locapart.chem.integrals import compute_integrals
from locapart.chem.manybody import build_space, eigensolve, lowdin, singlet_indices
from locapart.chem.partition import build_partition, build_partitioned_integrals
from locapart.chem.subsystem import (
    population_operator, subsystem_hamiltonian, total_operator,
)
from locapart.transfer.dynamics import TimeSeries

_log = logging.getLogger(__name__)

# Reduced mass of H2 (electron masses)
H2_MASS = 918.076

# Quadrature nodes with smaller relative weight are skipped
NODE_PRUNE = 1e-8

# Bond lengths below this are not a meaningful molecule
MIN_BOND = 0.2

_MC_CHUNK = 1000


class Error(Exception):
    """An error happened in the decoherence model."""


class StateOrderError(Error):
    """Tracked electronic states swapped order along the bond coordinate."""


@dataclass(frozen=True)
class VibronicModel:
    """Harmonic surfaces of the ground (g) and excited (e) states.

    Both vibrational states are the ground level (n = 0) of their surface.
    ``nu_*`` are vibrational quanta in hartree;
    the excited-surface values are model inputs.
    """
    r_eq_g: float = 1.4
    nu_g: float = 0.020
    r_eq_e: float = 1.6
    nu_e: float = 0.012
    mass: float = H2_MASS
    nodes: int = 16

    def __post_init__(self):
        if min(self.nu_g, self.nu_e, self.mass) <= 0.0:
            raise ValueError("expected positive frequencies and mass")
        if self.nodes < 1:
            raise ValueError("expected nodes >= 1")

    def _params(self, state):
        if state == "g":
            return self.r_eq_g, 0.5 * self.mass * self.nu_g
        if state == "e":
            return self.r_eq_e, 0.5 * self.mass * self.nu_e
        raise ValueError(f"expected state 'g' or 'e', got {state!r}")

    def chi(self, state, bond):
        """Return the vibrational wavefunction of *state* at *bond*."""
        center, expo = self._params(state)
        bond = np.asarray(bond, dtype=float)
        return (2.0 * expo / math.pi) ** 0.25 * np.exp(-expo * (bond - center) ** 2)

    def _product(self, si, sj):
        ci, ai = self._params(si)
        cj, aj = self._params(sj)
        expo = ai + aj
        center = (ai * ci + aj * cj) / expo
        pref = ((2.0 * ai / math.pi) ** 0.25 * (2.0 * aj / math.pi) ** 0.25
                * math.exp(-ai * aj / expo * (ci - cj) ** 2))
        return pref, expo, center

    def franck_condon(self):
        """Return the overlap of the two vibrational wavefunctions."""
        pref, expo, _ = self._product("g", "e")
        return pref * math.sqrt(math.pi / expo)

    def quadrature(self, si, sj):
        """Return bond lengths and weights for :math:`\\int \\chi_i \\chi_j f\\, dR`.

        Gauss-Hermite nodes are matched to the Gaussian product
        :math:`\\chi_i \\chi_j`.
        """
        pref, expo, center = self._product(si, sj)
        x, w = hermite.hermgauss(self.nodes)
        keep = w >= NODE_PRUNE * w.max()
        bonds = center + x[keep] / math.sqrt(expo)
        weights = pref * w[keep] / math.sqrt(expo)
        if bonds.min() < MIN_BOND:
            fstr = "quadrature reaches bond length {:.3f}; use fewer nodes"
            raise Error(fstr.format(bonds.min()))
        return bonds, weights

    def center(self, si, sj):
        """Return the center of the Gaussian product of two surfaces."""
        return self._product(si, sj)[2]


@dataclass(frozen=True)
class DecoherenceParams:
    """Gaussian gap distribution and Monte Carlo settings."""
    sigma: float = 1e-6
    samples: int = 10000
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0.0:
            raise ValueError("expected sigma >= 0")
        if self.samples < 1:
            raise ValueError("expected samples >= 1")


ElectronicPoint = collections.namedtuple(
    "ElectronicPoint", ["bond", "energies", "vectors", "hamiltonians", "populations"])


class H2Surfaces:
    """Electronic ground and excited singlet states of H2 along the bond.

    States are eigenvectors of the sum of the symmetrized subsystem
    Hamiltonians in a full CI space over Löwdin orbitals,
    so the site energies of every region add up to the total exactly.
    """

    def __init__(self, basis_name="sto-3g", resolution="default", excited=1):
        self.basis_name = basis_name
        self.resolution = resolution
        self.excited = excited
        self._raw = {}
        self._tracked = {}

    def _solve(self, bond):
        key = round(float(bond), 12)
        if key in self._raw:
            return self._raw[key]
        molecule = h2(bond)
        basis = build_basis(molecule, self.basis_name)
        tables = compute_integrals(basis, molecule)
        mos = lowdin(tables.S)
        partition = build_partition(molecule)
        parts = build_partitioned_integrals(basis, molecule, partition,
                                            self.resolution).to_mo(mos.coefs)
        space = build_space(mos, "fullci_2e")
        hams = {label: subsystem_hamiltonian(space, parts, label).matrix
                for label in partition.labels}
        pops = {label: population_operator(space, parts, label).matrix
                for label in partition.labels}
        evals, evecs = eigensolve(total_operator(
            [subsystem_hamiltonian(space, parts, label) for label in partition.labels]))
        singlets = singlet_indices(space, evecs)
        if len(singlets) <= self.excited:
            raise Error(f"bond {bond}: fewer than {self.excited + 1} singlet states")
        point = (evals[singlets] + tables.enuc, evecs[:, singlets], hams, pops)
        self._raw[key] = point
        _log.debug("solved H2 electronic states at bond %.6f", bond)
        return point

    def track(self, bonds):
        """Solve every bond length and return the tracked states.

        The ground and excited states are followed by maximum overlap,
        each new bond from its nearest tracked neighbour;
        the very first bonds are followed up from the shortest.
        A sign convention keeps them continuous.

        Raises
        ------
        StateOrderError
            The best-overlap state changes its energy order.
        """
        wanted = sorted({round(float(b), 12) for b in bonds} - set(self._tracked))
        if not wanted:
            return self._tracked
        known = sorted(self._tracked)
        if not known:
            self._follow(wanted, None)
            return self._tracked
        gaps = collections.defaultdict(list)
        for bond in wanted:
            gaps[bisect.bisect(known, bond)].append(bond)
        for gap, run in gaps.items():
            left = known[gap - 1] if gap > 0 else None
            right = known[gap] if gap < len(known) else None
            if left is None:
                up, down = [], run
            elif right is None:
                up, down = run, []
            else:
                mid = 0.5 * (left + right)
                up = [b for b in run if b <= mid]
                down = [b for b in run if b > mid]
            self._follow(up, left)
            self._follow(down[::-1], right)
        return self._tracked

    def _follow(self, chain, start):
        """Track the bonds of *chain* in order, starting next to *start*."""
        prev = None if start is None else self._tracked[start].vectors
        for bond in chain:
            energies, vectors, hams, pops = self._solve(bond)
            roles = (0, self.excited)
            chosen = np.zeros((vectors.shape[0], 2))
            for slot, role in enumerate(roles):
                vec = vectors[:, role]
                if prev is None:
                    pivot = np.argmax(np.abs(vec))
                    sign = 1.0 if vec[pivot] >= 0.0 else -1.0
                else:
                    ovl = prev[:, slot] @ vectors
                    best = int(np.argmax(np.abs(ovl)))
                    if best != role:
                        fstr = ("state order swap at bond {:.6f}: tracked state "
                                "{} overlaps best with singlet {}")
                        raise StateOrderError(fstr.format(bond, role, best))
                    sign = 1.0 if ovl[role] >= 0.0 else -1.0
                chosen[:, slot] = sign * vec
            point = ElectronicPoint(bond, energies[list(roles)], chosen, hams, pops)
            self._tracked[bond] = point
            prev = chosen

    def point(self, bond):
        """Return the tracked :class:`ElectronicPoint` at *bond*."""
        return self.track([bond])[round(float(bond), 12)]


@dataclass(frozen=True)
class SiteTerms:
    """Vibronically averaged terms of one region.

    ``E_g`` and ``E_e`` are the surface-averaged site energies,
    ``delta`` the cross term, and ``N_*`` the same for the population.
    ``omega`` is the vibronic gap and ``fc`` the Franck-Condon overlap.
    """
    label: str
    E_g: float
    E_e: float
    delta: float
    N_g: float
    N_e: float
    delta_N: float
    omega: float
    fc: float


def _average(surfaces, model, si, sj, label, kind):
    bonds, weights = model.quadrature(si, sj)
    tracked = surfaces.track(bonds)
    i = 0 if si == "g" else 1
    j = 0 if sj == "g" else 1
    total = 0.0
    for bond, wt in zip(bonds, weights):
        pt = tracked[round(float(bond), 12)]
        mat = pt.hamiltonians[label] if kind == "energy" else pt.populations[label]
        total += wt * (pt.vectors[:, i] @ mat @ pt.vectors[:, j])
    return total


def vibronic_site_terms(model, surfaces, label):
    """Return the :class:`SiteTerms` of region *label*.

    The gap is
    :math:`\\omega = (E_e - E_g) + (\\nu_e - \\nu_g) / 2`
    with the surface energies taken at their own equilibrium bonds.
    """
    bonds = [model.r_eq_g, model.r_eq_e]
    for si, sj in (("g", "g"), ("e", "e"), ("g", "e")):
        bonds.extend(model.quadrature(si, sj)[0])
    surfaces.track(bonds)

    terms = {}
    for kind in ("energy", "population"):
        terms[kind] = (
            _average(surfaces, model, "g", "g", label, kind),
            _average(surfaces, model, "e", "e", label, kind),
            _average(surfaces, model, "g", "e", label, kind),
        )
    e_g = surfaces.point(model.r_eq_g).energies[0]
    e_e = surfaces.point(model.r_eq_e).energies[1]
    omega = (e_e - e_g) + 0.5 * (model.nu_e - model.nu_g)
    return SiteTerms(label, *terms["energy"], *terms["population"],
                     omega, model.franck_condon())


def condon_delta(model, surfaces, label):
    """Return the cross term with the electronic element frozen at one bond.

    The bond is the center of the ground-excited Gaussian product.
    """
    bond = model.center("g", "e")
    pt = surfaces.point(bond)
    elem = pt.vectors[:, 0] @ pt.hamiltonians[label] @ pt.vectors[:, 1]
    return model.franck_condon() * elem


EnsembleChannel = collections.namedtuple("EnsembleChannel", ["mean", "stderr"])


def averaged_energy(terms, params, times, method="analytic", channel="energy"):
    """Return the ensemble-averaged site channel over *times*.

    ``analytic`` uses the Gaussian characteristic function,
    ``montecarlo`` averages over sampled gaps with a fixed seed and also
    returns the standard error of the mean.

    Returns
    -------
    EnsembleChannel
    """
    times = np.asarray(times, dtype=float)
    if np.any(times < 0.0):
        raise ValueError("expected times >= 0")
    if channel == "energy":
        base, delta = 0.5 * (terms.E_g + terms.E_e), terms.delta
    elif channel == "population":
        base, delta = 0.5 * (terms.N_g + terms.N_e), terms.delta_N
    else:
        raise ValueError(f"unknown channel {channel!r}")

    if method == "analytic":
        env = np.exp(-0.5 * (params.sigma * times) ** 2)
        mean = base + delta * np.cos(terms.omega * times) * env
        return EnsembleChannel(mean, np.zeros_like(times))
    if method != "montecarlo":
        raise ValueError(f"unknown method {method!r}")

    rng = np.random.default_rng(params.seed)
    accum = np.zeros_like(times)
    accum2 = np.zeros_like(times)
    done = 0
    while done < params.samples:
        size = min(_MC_CHUNK, params.samples - done)
        omegas = rng.normal(terms.omega, params.sigma, size=size)
        vals = np.cos(np.outer(omegas, times))
        accum += vals.sum(axis=0)
        accum2 += (vals * vals).sum(axis=0)
        done += size
    avg = accum / done
    var = np.maximum(accum2 / done - avg * avg, 0.0)
    stderr = abs(delta) * np.sqrt(var / done)
    return EnsembleChannel(base + delta * avg, stderr)


def decoherence_series(terms, params, times, method="analytic"):
    """Return a :class:`TimeSeries` with coherent and ensemble channels.

    *terms* maps region labels to :class:`SiteTerms`.
    Coherent channels are the undamped curves;
    ensemble channels carry the ``ens_`` prefix.
    """
    times = np.asarray(times, dtype=float)
    coherent = DecoherenceParams(0.0, params.samples, params.seed)
    energies, pops, ens = {}, {}, {}
    for label, term in terms.items():
        energies[label] = averaged_energy(term, coherent, times).mean
        pops[label] = averaged_energy(term, coherent, times, channel="population").mean
    for label, term in terms.items():
        chan = averaged_energy(term, params, times, method)
        ens[f"ens_E_{label}"] = chan.mean
        if method == "montecarlo":
            ens[f"ens_E_{label}_se"] = chan.stderr
    for label, term in terms.items():
        chan = averaged_energy(term, params, times, method, "population")
        ens[f"ens_N_{label}"] = chan.mean
    ens["ens_envelope"] = np.exp(-0.5 * (params.sigma * times) ** 2)
    meta = {"sigma": params.sigma, "method": method, "seed": params.seed}
    return TimeSeries(times, energies, pops, ens, meta)
