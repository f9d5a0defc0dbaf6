"""
Interactive Use

To prepare a terminal for interactive use:

    >>> from locapart.inter import *
"""


# Disable "unused-import", since that's basically all this module is for.
# pylint: disable=W0611


from locapart.chem.basis import (BasisSet, Molecule, build_basis,
                                 build_molecule, eval_basis, h2, h2_dimer,
                                 h_atom)
from locapart.chem.grid import build_grid, tier
from locapart.chem.integrals import boys, compute_integrals, dump_tables
from locapart.chem.manybody import (CIState, build_space, eigensolve,
                                    hamiltonian, lowdin,
                                    project_product_state, rhf,
                                    singlet_indices, slater_condon)
from locapart.chem.partition import (build_partition,
                                     build_partitioned_integrals,
                                     nuclear_repulsion_share, region_of)
from locapart.chem.subsystem import (expectation, naive_site_energy,
                                     population_operator,
                                     subsystem_hamiltonian)
from locapart.parsing.config import load_config, parse_config
from locapart.parsing.csvdata import read_table, write_table
from locapart.transfer.coupling import (forster_dexter,
                                        multi_electron_limit_check,
                                        pair_superposition,
                                        predicted_site_energy)
from locapart.transfer.decoherence import (DecoherenceParams, H2Surfaces,
                                           VibronicModel, averaged_energy,
                                           decoherence_series,
                                           vibronic_site_terms)
from locapart.transfer.dynamics import (TimeSeries, default_times, propagate,
                                        site_series)
from locapart.transfer.scenario import (System, initial_state, preset_state,
                                        run_dynamics)
