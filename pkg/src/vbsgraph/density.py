"""Reduced density matrices of VBS states and checks of their support.

The central check: every eigenvector of the block density matrix with a
nonzero eigenvalue is annihilated by the block Hamiltonian, so the support is
contained in the ground space, whose dimension is given by the boundary
degeneracy formula.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import BlockTooSmallError, NonPositiveAlphaError, NormZeroError
from .graph import Cut, SpinAssignment
from .hamiltonian import (
    BlockHamiltonian,
    EdgeCoefficients,
    block_hamiltonian,
    default_coefficients,
    edge_hamiltonian,
)
from .hilbert import BasisIndexer, StateVector, partial_trace, total_spin_operators
from .policy import DEFAULT_POLICY, NumericPolicy


def density_matrix(cut: Cut, vbs: StateVector) -> np.ndarray:
    """rho_b = Tr_E |VBS><VBS| / <VBS|VBS>, in the block's canonical basis."""
    if vbs.norm == 0:
        raise NormZeroError("VBS state vector is zero")
    return partial_trace(vbs, cut.block, vbs.indexer)


@dataclass
class DensitySpectrum:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns, matching eigenvalues
    zero_threshold: float

    @property
    def support_dim(self) -> int:
        return int(np.count_nonzero(self.eigenvalues > self.zero_threshold))

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    @property
    def support(self) -> np.ndarray:
        return self.eigenvalues[: self.support_dim]

    @property
    def support_vectors(self) -> np.ndarray:
        return self.eigenvectors[:, : self.support_dim]

    def support_projector(self) -> np.ndarray:
        v = self.support_vectors
        return v @ v.conj().T


def spectrum(rho: np.ndarray, policy: NumericPolicy = DEFAULT_POLICY) -> DensitySpectrum:
    rho = np.asarray(rho)
    rho = 0.5 * (rho + rho.conj().T)
    vals, vecs = la.eigh(rho)
    order = np.argsort(vals)[::-1]
    vals, vecs = vals[order], vecs[:, order]
    thr = policy.zero_threshold(vals.size, vals[0] if vals.size else 0.0)
    return DensitySpectrum(vals, vecs, thr)


@dataclass
class EntropyReport:
    von_neumann: float
    renyi: dict[float, float]
    saturation: float | None = None  # ln(deg), when known

    def is_monotone(self, tol: float = 1e-12) -> bool:
        alphas = sorted(self.renyi)
        vals = [self.renyi[a] for a in alphas]
        return all(b <= a + tol for a, b in zip(vals, vals[1:]))


def renyi_entropy(probs: np.ndarray, alpha: float) -> float:
    if alpha <= 0:
        raise NonPositiveAlphaError(f"Renyi index must be positive, got {alpha}")
    p = probs[probs > 0]
    if alpha == 1:
        return float(-np.sum(p * np.log(p)))
    if np.isinf(alpha):
        return float(-np.log(p.max()))
    return float(np.log(np.sum(p**alpha)) / (1 - alpha))


def entropies(spec: DensitySpectrum, alphas=(0.5, 2.0), deg: int | None = None) -> EntropyReport:
    """Von Neumann and Renyi entropies (nats) over the support eigenvalues."""
    alphas = [float(a) for a in alphas]
    for a in alphas:
        if a <= 0:
            raise NonPositiveAlphaError(f"Renyi index must be positive, got {a}")
    p = np.clip(spec.support, 0.0, None)
    p = p / p.sum()
    return EntropyReport(
        von_neumann=renyi_entropy(p, 1.0),
        renyi={a: renyi_entropy(p, a) for a in alphas},
        saturation=float(np.log(deg)) if deg else None,
    )


def degeneracy_formula(cut: Cut) -> int:
    """prod over boundary vertices of (sum of cut multiplicities + 1)."""
    return prod(cut.cut_multiplicity(v) + 1 for v in cut.boundary_block)


def hilbert_dim(cut: Cut, s: SpinAssignment) -> int:
    return prod(s[v] + 1 for v in cut.block)


def _operator_scale(h) -> float:
    if sp.issparse(h):
        if h.nnz == 0:
            return 0.0
        return float(spla.norm(h, 1))
    return float(np.max(np.sum(np.abs(h), axis=0), initial=0.0))


def nullity(h, policy: NumericPolicy = DEFAULT_POLICY) -> tuple[int, np.ndarray]:
    """Dimension of the (numerical) zero eigenspace of a PSD operator and an orthonormal basis.

    Eigenvalues at most ``policy.null_rel * scale`` count as zero; ``scale`` is the
    largest eigenvalue (dense path) or the 1-norm bound (iterative path).
    """
    if isinstance(h, BlockHamiltonian):
        h = h.operator
    dim = h.shape[0]
    scale = _operator_scale(h)
    if scale == 0.0:
        return dim, np.eye(dim)
    if dim <= policy.dense_null_max:
        dense = h.toarray() if sp.issparse(h) else np.asarray(h)
        vals, vecs = la.eigh(0.5 * (dense + dense.conj().T))
        tol = policy.null_rel * max(vals[-1], 0.0)
        keep = vals <= tol
        return int(keep.sum()), vecs[:, keep]
    return _iterative_nullity(sp.csr_matrix(h), scale, policy)


def _iterative_nullity(h: sp.csr_matrix, scale: float, policy: NumericPolicy):
    """Shift-invert Lanczos below zero, doubling the number of pairs until one clears the tolerance."""
    dim = h.shape[0]
    tol = policy.null_rel * scale
    sigma = -1e-3 * scale
    k = 8
    while True:
        k = min(k, dim - 2)
        vals, vecs = spla.eigsh(h, k=k, sigma=sigma, which="LM", tol=1e-13)
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
        if vals[-1] > tol or k >= dim - 2:
            break
        k *= 2
    keep = vals <= tol
    q, _ = np.linalg.qr(vecs[:, keep])
    return int(keep.sum()), q


def null_projector(basis: np.ndarray) -> np.ndarray:
    return basis @ basis.conj().T


def lowest_state(h: sp.spmatrix) -> np.ndarray:
    """Ground state of a sparse PSD Hamiltonian with a unique zero mode (exact diagonalisation)."""
    dim = h.shape[0]
    if dim <= 2048:
        vals, vecs = la.eigh(h.toarray())
        return vecs[:, 0]
    vals, vecs = spla.eigsh(h, k=2, sigma=-0.1, which="LM", tol=1e-14)
    return vecs[:, np.argmin(vals)]


@dataclass
class TheoremReport:
    max_residual: float  # ||H_b rho_b||_max
    edge_residuals: dict  # ||H(k,l) rho_b||_max per internal edge
    eigvec_residuals: list[float]  # ||H_b |lambda>|| for support eigenvectors
    support_dim: int
    degeneracy: int
    nullity: int
    dim: int
    tolerance: float
    saturated: bool = field(default=False)  # D == deg, reported only

    @property
    def residuals_ok(self) -> bool:
        worst_edge = max(self.edge_residuals.values(), default=0.0)
        worst_vec = max(self.eigvec_residuals, default=0.0)
        return max(self.max_residual, worst_edge, worst_vec) <= self.tolerance

    @property
    def support_in_ground_space(self) -> bool:
        return self.support_dim <= self.nullity

    @property
    def formula_matches(self) -> bool:
        return self.nullity == self.degeneracy

    @property
    def verdict(self) -> bool:
        return self.residuals_ok and self.support_in_ground_space and self.formula_matches

    def as_dict(self) -> dict:
        return {
            "max_residual": self.max_residual,
            "edge_residuals": {f"{k}-{l}": v for (k, l), v in self.edge_residuals.items()},
            "max_eigenvector_residual": max(self.eigvec_residuals, default=0.0),
            "support_dim": self.support_dim,
            "degeneracy": self.degeneracy,
            "nullity": self.nullity,
            "dim": self.dim,
            "tolerance": self.tolerance,
            "residuals_ok": self.residuals_ok,
            "support_in_ground_space": self.support_in_ground_space,
            "formula_matches": self.formula_matches,
            "saturated": self.saturated,
            "verdict": self.verdict,
        }


def verify_theorem(cut: Cut, s: SpinAssignment, coeffs: EdgeCoefficients | None,
                   vbs: StateVector, policy: NumericPolicy = DEFAULT_POLICY,
                   rho: np.ndarray | None = None) -> TheoremReport:
    """Check H(k,l) rho_b = 0 per internal edge, H_b rho_b = 0, H_b|lambda> = 0, D <= nullity."""
    if cut.n_block < 2:
        raise BlockTooSmallError("the theorem needs a block with at least two vertices")
    if rho is None:
        rho = density_matrix(cut, vbs)
    if coeffs is None:
        coeffs = default_coefficients(cut.graph, s)
    hb = block_hamiltonian(cut, s, coeffs, policy)
    edge_res = {}
    for k, l, m in cut.internal_edges:
        hkl = edge_hamiltonian(k, l, m, coeffs, hb.indexer, policy)
        edge_res[(k, l)] = float(np.max(np.abs(hkl @ rho), initial=0.0))
    hrho = hb.operator @ rho
    spec = spectrum(rho, policy)
    vec_res = [float(np.linalg.norm(hb.operator @ v)) for v in spec.support_vectors.T]
    n0, _ = nullity(hb, policy)
    deg = degeneracy_formula(cut)
    return TheoremReport(
        max_residual=float(np.max(np.abs(hrho), initial=0.0)),
        edge_residuals=edge_res,
        eigvec_residuals=vec_res,
        support_dim=spec.support_dim,
        degeneracy=deg,
        nullity=n0,
        dim=hb.dim,
        tolerance=policy.residual_tol,
        saturated=spec.support_dim == deg,
    )


def limit_density(cut: Cut, ground_projector: np.ndarray) -> np.ndarray:
    """Large-block limit P_deg / deg from a ground-space projector of H_b."""
    p = np.asarray(ground_projector)
    deg = int(round(np.trace(p).real))
    return p / deg


def schmidt_check(state: StateVector, cut: Cut, policy: NumericPolicy = DEFAULT_POLICY) -> float:
    """Max difference between the nonzero spectra of rho_B and rho_E."""
    a = spectrum(partial_trace(state, cut.block, state.indexer), policy)
    b = spectrum(partial_trace(state, cut.environment, state.indexer), policy)
    n = min(a.dim, b.dim)
    return float(np.max(np.abs(a.eigenvalues[:n] - b.eigenvalues[:n]), initial=0.0))


def single_vertex_report(cut: Cut, s: SpinAssignment, vbs: StateVector,
                         policy: NumericPolicy = DEFAULT_POLICY) -> dict:
    """Support dimension of a one-vertex block against the maximal-entanglement guess 2S+1.

    Reported only; it is a conjecture, not a theorem.
    """
    (v,) = cut.block
    spec = spectrum(density_matrix(cut, vbs), policy)
    flat = float(np.max(np.abs(spec.eigenvalues - 1.0 / spec.dim)))
    return {
        "vertex": v,
        "twice_spin": s[v],
        "support_dim": spec.support_dim,
        "expected": s[v] + 1,
        "maximally_mixed_deviation": flat,
        "holds": spec.support_dim == s[v] + 1,
    }


def spin_multiplets(spec: DensitySpectrum, indexer: BasisIndexer, cluster_tol: float = 1e-8):
    """Label support eigenvectors by total block spin.

    Groups (numerically) degenerate support eigenvalues, diagonalises the block
    S_tot^2 inside each group and returns ``[(twice_J, eigenvalue), ...]``, one
    entry per support eigenvector.
    """
    s2 = total_spin_operators(indexer)["S2"]
    vals, vecs = spec.support, spec.support_vectors
    labels = []
    i = 0
    while i < vals.size:
        j = i + 1
        while j < vals.size and abs(vals[j] - vals[i]) <= cluster_tol:
            j += 1
        v = vecs[:, i:j]
        small = v.conj().T @ (s2 @ v)
        jj = la.eigvalsh(0.5 * (small + small.conj().T))
        for x in jj:
            twice_j = int(round(np.sqrt(1 + 4 * max(x, 0.0)) - 1))
            labels.append((twice_j, float(np.mean(vals[i:j]))))
        i = j
    return labels
