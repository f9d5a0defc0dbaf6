"""
Scenario pipelines

A :class:`System` assembles the stages of one geometry lazily:
basis, integrals, partition, orbitals, many-body space, operators,
and eigenpairs.
The ``run_*`` functions turn a validated
:class:`~locapart.parsing.config.ScenarioConfig` into result objects;
writing files is left to the command line front end.

Interface Classes:
    System

Interface Functions:
    molecule_of
    system_of
    preset_state
    initial_state
    run_dynamics
    run_decoherence
    run_limits
    limit_fragments
    run_naive
"""

import functools
import logging
import math

import numpy as np

from locapart.chem.basis import build_basis, build_molecule, h2, h2_dimer, h_atom
from locapart.chem.integrals import compute_integrals
from locapart.chem.manybody import (
    CIState, SpaceError, build_space, eigensolve, hamiltonian, lowdin, rhf,
    project_product_state, singlet_indices,
)
from locapart.chem.partition import (
    build_partition, build_partitioned_integrals, nuclear_repulsion_share,
)
from locapart.chem.subsystem import (
    expectation, naive_site_energy, population_operator, subsystem_hamiltonian,
    total_operator,
)
from locapart.transfer import coupling
from locapart.transfer.decoherence import (
    DecoherenceParams, H2Surfaces, VibronicModel, decoherence_series,
    vibronic_site_terms,
)
from locapart.transfer.dynamics import (
    DEFAULT_PERIODS, DEFAULT_SAMPLES, default_times, propagate, site_series,
)

_log = logging.getLogger(__name__)


class System:
    """Lazily computed stages of a partitioned molecule.

    Parameters
    ----------
    molecule : Molecule
    basis_name : str
    partition : dict, optional
        Keyword arguments of
        :func:`~locapart.chem.partition.build_partition`.
    resolution : str or mapping
        Grid tier.
    grid_scheme : str
    scheme : str
        Many-body scheme, ``fullci_2e`` or ``cis``.
    orbitals : str
        ``lowdin`` or ``rhf``.
    """

    def __init__(self, molecule, basis_name="sto-3g", partition=None,
                 resolution="default", grid_scheme="becke",
                 scheme="fullci_2e", orbitals="lowdin"):
        self.molecule = molecule
        self.basis_name = basis_name
        self.partition_opts = dict(partition or {})
        self.resolution = resolution
        self.grid_scheme = grid_scheme
        self.scheme = scheme
        self.orbitals = orbitals

    @property
    def n_electrons(self):
        """Return the electron count of the neutral molecule."""
        return int(round(self.molecule.charges.sum()))

    @functools.cached_property
    def basis(self):
        return build_basis(self.molecule, self.basis_name)

    @functools.cached_property
    def tables(self):
        return compute_integrals(self.basis, self.molecule)

    @functools.cached_property
    def partition(self):
        opts = dict(self.partition_opts)
        if opts.get("rule") == "plane" and opts.get("normal") is None:
            labels = self.molecule.region_labels
            if len(labels) == 2:
                opts["normal"] = (self.molecule.centroid(labels[1])
                                  - self.molecule.centroid(labels[0]))
        return build_partition(self.molecule, **opts)

    @functools.cached_property
    def parts(self):
        return build_partitioned_integrals(self.basis, self.molecule,
                                           self.partition, self.resolution,
                                           self.grid_scheme)

    @functools.cached_property
    def mos(self):
        if self.orbitals == "rhf":
            return rhf(self.tables, self.n_electrons)
        return lowdin(self.tables.S)

    @functools.cached_property
    def parts_mo(self):
        return self.parts.to_mo(self.mos.coefs)

    @functools.cached_property
    def space(self):
        return build_space(self.mos, self.scheme, self.n_electrons)

    @functools.cached_property
    def hamiltonian(self):
        """Return the analytic many-body Hamiltonian, nuclear repulsion included."""
        h_mo, eri_mo = self.tables.to_mo(self.mos.coefs)
        return hamiltonian(self.space, h_mo, eri_mo, self.tables.enuc)

    @functools.cached_property
    def eigen(self):
        return eigensolve(self.hamiltonian)

    def site_hamiltonians(self, flavor="symmetrized"):
        """Return the subsystem Hamiltonian of every region."""
        if flavor == "symmetrized":
            return self._symmetrized
        return [subsystem_hamiltonian(self.space, self.parts_mo, label, flavor)
                for label in self.partition.labels]

    @functools.cached_property
    def _symmetrized(self):
        return [subsystem_hamiltonian(self.space, self.parts_mo, label)
                for label in self.partition.labels]

    @functools.cached_property
    def populations(self):
        return [population_operator(self.space, self.parts_mo, label)
                for label in self.partition.labels]

    @functools.cached_property
    def grid_hamiltonian(self):
        """Return the electronic Hamiltonian as the sum of all site operators."""
        return total_operator(self._symmetrized)

    @functools.cached_property
    def grid_eigen(self):
        return eigensolve(self.grid_hamiltonian)

    @functools.cached_property
    def singlets(self):
        """Return the singlet eigenvector indices of the grid Hamiltonian."""
        return singlet_indices(self.space, self.grid_eigen[1])

    @functools.cached_property
    def nuclear_shares(self):
        return nuclear_repulsion_share(self.molecule, self.partition)

    def fragment_orbital(self, label, kind):
        """Return the AO coefficients of the first *kind* function in region *label*."""
        atom = self.molecule.region_atoms(label)[0]
        vec = np.zeros(len(self.basis))
        vec[self.basis.find(atom, kind)] = 1.0
        return vec


def molecule_of(geometry):
    """Return the molecule of a validated ``[geometry]`` block."""
    if "atoms" in geometry:
        return build_molecule(geometry["atoms"])
    preset = geometry["preset"]
    if preset in ("h2", "h_pair"):
        return h2(geometry["R"])
    if preset == "h2_dimer":
        return h2_dimer(geometry["R"], geometry["bond"])
    return h_atom()


def system_of(config):
    """Return the :class:`System` of a scenario."""
    return System(molecule_of(config.geometry), config.basis, config.partition,
                  config.grid, config.grid_scheme, config.manybody["scheme"],
                  config.manybody["orbitals"])


def _eigen_pair(system, first, second, label):
    singlets = system.singlets
    if len(singlets) <= second:
        fstr = "preset {} needs {} singlet states, the space has {}"
        raise SpaceError(fstr.format(label, second + 1, len(singlets)))
    amp = 1.0 / math.sqrt(2.0)
    weights = {singlets[first]: amp, singlets[second]: amp}
    return CIState.from_eigen_weights(system.space, system.grid_eigen[1], weights, label)


def preset_state(system, preset, coupling_name="singlet"):
    """Return the initial state of a named preset.

    ``1sA_2pzB`` is the antisymmetrized product of the 1s function of
    region A and the 2pz function of region B with the given spin
    coupling.
    ``gs_plus_e1`` and ``gs_plus_e3`` are equal superpositions of the
    ground singlet and the first or third excited singlet of the grid
    Hamiltonian.
    """
    if preset == "1sA_2pzB":
        labels = system.partition.labels
        a = system.fragment_orbital(labels[0], "s")
        b = system.fragment_orbital(labels[1], "pz")
        return project_product_state(system.space, system.mos, system.tables.S,
                                     a, b, coupling_name)
    if preset == "gs_plus_e1":
        return _eigen_pair(system, 0, 1, preset)
    if preset == "gs_plus_e3":
        return _eigen_pair(system, 0, 3, preset)
    raise ValueError(f"unknown state preset {preset!r}")


def initial_state(system, state, coupling_name="singlet"):
    """Return the initial state of a validated ``[state]`` block.

    Explicit weights index the eigenvectors of the grid Hamiltonian in
    ascending energy order.
    """
    if "preset" in state:
        return preset_state(system, state["preset"], coupling_name)
    dim = system.space.dim
    bad = [i for i in state["weights"] if i >= dim]
    if bad:
        raise SpaceError(f"eigenstate indices {bad} exceed the space dimension {dim}")
    return CIState.from_eigen_weights(system.space, system.grid_eigen[1],
                                      state["weights"], "weights")


def run_dynamics(system, state, samples=DEFAULT_SAMPLES, t_max=None,
                 periods=DEFAULT_PERIODS):
    """Return the :class:`TimeSeries` of site energies and populations.

    The state evolves under the grid Hamiltonian.
    Without *t_max*, the time grid follows :func:`default_times`.
    """
    evals, evecs = system.grid_eigen
    weights = evecs.T @ state.coefs
    if t_max is None:
        times = default_times(evals, weights, samples, periods)
    else:
        times = np.linspace(0.0, t_max, samples)
    cts = propagate(state.coefs, system.grid_eigen, times)
    series = site_series(cts, times, system.site_hamiltonians(), system.populations)
    series.metadata.update({
        "state": state.label,
        "projection_loss": state.loss,
        "nuclear_shares": system.nuclear_shares,
        "nuclear_repulsion": system.tables.enuc,
    })
    drift = np.abs(series.total - series.total[0]).max()
    _log.info("dynamics: %d samples to t = %.6g au, energy drift %.3e",
              len(times), times[-1], drift)
    return series


def run_decoherence(config):
    """Return the decoherence :class:`TimeSeries` of H2 and its site terms.

    The molecule is always H2 with atoms in regions ``A`` and ``B``;
    its bond lengths come from the vibronic model.
    """
    if config.geometry and config.geometry != {"preset": "h2"}:
        fstr = "decoherence runs need H2 without a fixed bond, got geometry {!r}"
        raise ValueError(fstr.format(config.geometry))
    params = dict(config.decoherence)
    method = params.pop("method", "analytic")
    ens = DecoherenceParams(params.pop("sigma", 1e-6),
                            params.pop("samples", 10000),
                            params.pop("seed", config.seed))
    model = VibronicModel(**params)
    surfaces = H2Surfaces(config.basis, config.grid)
    terms = {label: vibronic_site_terms(model, surfaces, label) for label in ("A", "B")}
    if config.time.get("t_max") is None:
        # eight envelope widths, or a fixed span without dephasing
        t_max = 8.0 / ens.sigma if ens.sigma > 0.0 else 1e4
    else:
        t_max = config.time["t_max"]
    times = np.linspace(0.0, t_max, config.time.get("samples", DEFAULT_SAMPLES))
    series = decoherence_series(terms, ens, times, method)
    series.metadata["vibronic"] = {
        "r_eq_g": model.r_eq_g, "nu_g": model.nu_g,
        "r_eq_e": model.r_eq_e, "nu_e": model.nu_e,
        "mass": model.mass, "nodes": model.nodes,
    }
    return series, terms


def run_limits(config):
    """Return the Förster/Dexter and closed-shell limit reports.

    The open-shell check uses two hydrogen atoms, each in its own
    region, with the 1s and 2pz functions as fragment orbitals.
    The closed-shell check uses the fragments of :func:`limit_fragments`
    in the scenario basis.

    Returns
    -------
    (list, list)
        ``(separation, CouplingReport, predicted, measured, split)`` rows
        and
        :class:`~locapart.transfer.coupling.LimitRow` objects.
    """
    separations = config.limits["separations"]
    # the open-shell check needs p functions
    basis_name = "sto-3g-p"
    amps = np.array([[0.0, 1.0], [1.0, 0.0]]) / math.sqrt(2.0)
    couplings = []
    for sep in separations:
        system = System(h2(sep), basis_name, config.partition, config.grid,
                        config.grid_scheme)
        a_orbs = [system.fragment_orbital("A", "s"), system.fragment_orbital("A", "pz")]
        b_orbs = [system.fragment_orbital("B", "s"), system.fragment_orbital("B", "pz")]
        report = coupling.forster_dexter(system.tables, system.molecule, a_orbs, b_orbs,
                                         [0], [1])
        state = coupling.pair_superposition(system.space, system.mos, system.tables.S,
                                            a_orbs, b_orbs, amps)
        measured = [expectation(state, op) for op in system.site_hamiltonians()]
        predicted = [coupling.predicted_site_energy(report, amps, site)
                     for site in ("A", "B")]
        couplings.append((sep, report, predicted, measured,
                          coupling.split_ratio(report, amps, *measured)))
    frag_a, frag_b, axis = limit_fragments(config)
    limit_rows = coupling.multi_electron_limit_check(
        frag_a, frag_b, separations, config.basis, config.grid, axis)
    return couplings, limit_rows


def limit_fragments(config):
    """Return the closed-shell fragments of a limits scenario and their axis.

    A ``[geometry]`` block gives the two fragments as its two regions,
    with the axis joining their centroids.
    Without one, both fragments are H2 with the ``[limits]`` bond length,
    side by side as in the ``h2_dimer`` preset.
    """
    if config.geometry:
        joint = molecule_of(config.geometry)
    else:
        joint = h2_dimer(2.0 * config.limits["bond"], config.limits["bond"])
    first, second = joint.region_labels
    axis = joint.centroid(second) - joint.centroid(first)
    return joint.subset(first), joint.subset(second), axis


def run_naive(system, coupling_name="product"):
    """Return the naive and localized site energies of the ``1sA_2pzB`` state.

    Both partitions see the same state: the antisymmetrized product of
    1s on A and 2pz on B, with opposite spins (``product``) or
    parallel spins (``triplet``).

    Returns
    -------
    (NaiveReport, dict)
        The naive report and the localized energy of every region.
    """
    if coupling_name not in ("product", "triplet"):
        raise ValueError(f"expected coupling product or triplet, got {coupling_name!r}")
    labels = system.partition.labels
    a = system.fragment_orbital(labels[0], "s")
    b = system.fragment_orbital(labels[1], "pz")
    report = naive_site_energy(system.tables, system.molecule, a, b,
                               system.molecule.region_atoms(labels[0]),
                               system.molecule.region_atoms(labels[1]),
                               same_spin=(coupling_name == "triplet"))
    state = preset_state(system, "1sA_2pzB", coupling_name)
    local = {op.label: expectation(state, op) for op in system.site_hamiltonians()}
    return report, local
