"""End-to-end helpers shared by the CLI and the acceptance suite."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .closed_form import ChainSpec
from .density import (
    DensitySpectrum,
    degeneracy_formula,
    density_matrix,
    entropies,
    nullity,
    spectrum,
    spin_multiplets,
)
from .graph import Cut, MultiGraph, SpinAssignment, cut_graph, infer_spins
from .hamiltonian import EdgeCoefficients, block_hamiltonian, block_indexer
from .hilbert import StateVector
from .policy import DEFAULT_POLICY, NumericPolicy
from .vbs import vbs_schwinger


@dataclass
class BlockAnalysis:
    graph: MultiGraph
    spins: SpinAssignment
    cut: Cut
    state: StateVector
    rho: np.ndarray
    spectrum: DensitySpectrum

    @property
    def degeneracy(self) -> int:
        return degeneracy_formula(self.cut)


def analyze_block(g: MultiGraph, block, policy: NumericPolicy = DEFAULT_POLICY,
                  force: bool = False, state: StateVector | None = None) -> BlockAnalysis:
    s = infer_spins(g)
    cut = cut_graph(g, block)
    if state is None:
        state = vbs_schwinger(g, s, policy, force)
    rho = density_matrix(cut, state)
    return BlockAnalysis(g, s, cut, state, rho, spectrum(rho, policy))


def block_report(a: BlockAnalysis, alphas=(2.0,), coeffs: EdgeCoefficients | None = None,
                 policy: NumericPolicy = DEFAULT_POLICY) -> dict:
    deg = a.degeneracy
    ent = entropies(a.spectrum, alphas, deg)
    out = {
        "block": list(a.cut.block),
        "dim": a.spectrum.dim,
        "support_dim": a.spectrum.support_dim,
        "deg": deg,
        "zero_threshold": a.spectrum.zero_threshold,
        "eigenvalues": [float(f"{x:.15g}") for x in a.spectrum.eigenvalues],
        "von_neumann": float(f"{ent.von_neumann:.15g}"),
        "renyi": {f"{k:g}": float(f"{v:.15g}") for k, v in ent.renyi.items()},
        "ln_deg": float(f"{np.log(deg):.15g}"),
    }
    if a.cut.n_block >= 2:
        hb = block_hamiltonian(a.cut, a.spins, coeffs, policy)
        out["nullity"] = nullity(hb, policy)[0]
    return out


def chain_labels(chain: ChainSpec, policy: NumericPolicy = DEFAULT_POLICY):
    """Numerical ``(2J, eigenvalue)`` labels of the support for a chain block."""
    g, block = chain.graph()
    a = analyze_block(g, block, policy)
    return spin_multiplets(a.spectrum, block_indexer(a.cut, a.spins))
