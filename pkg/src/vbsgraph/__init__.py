"""Valence-bond-solid ground states of AKLT-type Hamiltonians on multigraphs."""

__version__ = "0.1.0"

from .closed_form import (
    ChainSpec,
    basic_chain_eigenvalues,
    decay_factor,
    fit_decay_structure,
    lambda_lm,
    lambda_ls,
    verify_chain_spectrum,
)
from .coherent import PartitionEstimate, coherent_state, identity_resolution_check, mc_partition
from .density import (
    DensitySpectrum,
    EntropyReport,
    TheoremReport,
    degeneracy_formula,
    density_matrix,
    entropies,
    nullity,
    spectrum,
    spin_multiplets,
    verify_theorem,
)
from .errors import *  # noqa: F401,F403
from .graph import (
    Cut,
    MultiGraph,
    SpinAssignment,
    check_uniqueness,
    cut_graph,
    infer_spins,
    load_graph,
    parse_graph,
)
from .hamiltonian import block_hamiltonian, full_hamiltonian, projector_pi
from .hilbert import BasisIndexer, StateVector, partial_trace
from .pipeline import analyze_block, chain_labels
from .policy import DEFAULT_POLICY, NumericPolicy
from .vbs import ground_space_basis, vbs_schwinger, vbs_symmetrized
