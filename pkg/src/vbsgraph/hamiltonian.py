"""Edge projectors, AKLT edge terms, the full Hamiltonian and the block Hamiltonian.

Total edge spins ``J`` are passed doubled (``J2 = 2J``) like every other spin.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

import numpy as np
import scipy.sparse as sp

from .errors import (
    GraphSyntaxError,
    JOutOfRangeError,
    MissingCoefficientError,
    NonPositiveCoefficientError,
    ProjectorInstabilityError,
    UniquenessViolatedError,
)
from .graph import Cut, MultiGraph, SpinAssignment, check_uniqueness
from .hilbert import BasisIndexer, embed_local, guard_dim, two_site_casimir
from .policy import DEFAULT_POLICY, NumericPolicy

# {(k, l): {J2: A_J}} with k < l
EdgeCoefficients = dict


def allowed_j2(twice_k: int, twice_l: int) -> range:
    return range(abs(twice_k - twice_l), twice_k + twice_l + 1, 2)


def penalized_j2(twice_k: int, twice_l: int, multiplicity: int) -> range:
    """Doubled J values carrying a positive coefficient: S_k+S_l-M < J <= S_k+S_l."""
    top = twice_k + twice_l
    return range(top - 2 * multiplicity + 2, top + 1, 2)


@lru_cache(maxsize=256)
def _two_site_projector(twice_k: int, twice_l: int, j2: int, drift_tol: float) -> np.ndarray:
    if j2 not in allowed_j2(twice_k, twice_l):
        raise JOutOfRangeError(f"2J={j2} not allowed for 2S=({twice_k},{twice_l})")
    cas = two_site_casimir(twice_k, twice_l)
    eye = np.eye(cas.shape[0])
    target = j2 * (j2 + 2) / 4
    proj = eye.copy()
    for other in allowed_j2(twice_k, twice_l):
        if other == j2:
            continue
        val = other * (other + 2) / 4
        proj = proj @ (cas - val * eye) / (target - val)
    drift = np.max(np.abs(proj @ proj - proj))
    if drift > drift_tol:
        raise ProjectorInstabilityError(
            f"Casimir-polynomial projector drift {drift:.2e} for 2S=({twice_k},{twice_l}), "
            f"2J={j2}; build it in the Clebsch-Gordan basis instead"
        )
    proj.setflags(write=False)
    return proj


def two_site_projector(twice_k: int, twice_l: int, j2: int,
                       policy: NumericPolicy = DEFAULT_POLICY) -> np.ndarray:
    """pi_J as a product over the other allowed j of ((S_k+S_l)^2 - j(j+1)) / (J(J+1) - j(j+1))."""
    return _two_site_projector(int(twice_k), int(twice_l), int(j2), policy.idempotency_drift)


def projector_pi(k: int, l: int, j2: int, indexer: BasisIndexer,
                 policy: NumericPolicy = DEFAULT_POLICY) -> sp.csr_matrix:
    tk = indexer.twice_spins[indexer.position(k)]
    tl = indexer.twice_spins[indexer.position(l)]
    return embed_local(two_site_projector(tk, tl, j2, policy), [k, l], indexer)


def default_coefficients(g: MultiGraph, s: SpinAssignment, value: float = 1.0) -> EdgeCoefficients:
    return {
        (k, l): {j2: value for j2 in penalized_j2(s[k], s[l], m)} for k, l, m in g.edges
    }


def random_coefficients(g: MultiGraph, s: SpinAssignment, rng=None,
                        low: float = 0.1, high: float = 10.0) -> EdgeCoefficients:
    """Log-uniform positive coefficients, for checks that must not depend on A_J."""
    rng = np.random.default_rng(rng)
    return {
        (k, l): {j2: float(np.exp(rng.uniform(np.log(low), np.log(high))))
                 for j2 in penalized_j2(s[k], s[l], m)}
        for k, l, m in g.edges
    }


def parse_coefficients(text: str) -> EdgeCoefficients:
    """Lines ``A <k> <l> <2J> <value>``; ``#`` comments allowed."""
    out: EdgeCoefficients = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if tok[0] != "A" or len(tok) != 5:
            raise GraphSyntaxError(lineno, "expected 'A <k> <l> <2J> <value>'")
        try:
            k, l, j2 = int(tok[1]), int(tok[2]), int(tok[3])
            val = float(tok[4])
        except ValueError:
            raise GraphSyntaxError(lineno, "malformed coefficient line") from None
        out.setdefault((min(k, l), max(k, l)), {})[j2] = val
    return out


def _edge_coeffs(coeffs: Mapping, k: int, l: int) -> Mapping[int, float]:
    key = (min(k, l), max(k, l))
    if key not in coeffs:
        raise MissingCoefficientError(f"no coefficients for edge {key}")
    return coeffs[key]


def two_site_edge_hamiltonian(twice_k: int, twice_l: int, multiplicity: int,
                              edge_coeffs: Mapping[int, float],
                              policy: NumericPolicy = DEFAULT_POLICY) -> np.ndarray:
    needed = set(penalized_j2(twice_k, twice_l, multiplicity))
    given = set(edge_coeffs)
    if needed - given:
        raise MissingCoefficientError(f"missing A_J for 2J in {sorted(needed - given)}")
    if given - needed:
        raise JOutOfRangeError(f"A_J given for 2J in {sorted(given - needed)}, outside the penalized range")
    d = (twice_k + 1) * (twice_l + 1)
    h = np.zeros((d, d))
    for j2 in sorted(needed):
        a = edge_coeffs[j2]
        if not a > 0:
            raise NonPositiveCoefficientError(f"A_J must be positive, got {a} for 2J={j2}")
        h += a * two_site_projector(twice_k, twice_l, j2, policy)
    return h


def edge_hamiltonian(k: int, l: int, multiplicity: int, coeffs: EdgeCoefficients,
                     indexer: BasisIndexer, policy: NumericPolicy = DEFAULT_POLICY) -> sp.csr_matrix:
    """H(k,l) = sum over penalized J of A_J pi_J, embedded in ``indexer``'s space."""
    tk = indexer.twice_spins[indexer.position(k)]
    tl = indexer.twice_spins[indexer.position(l)]
    h = two_site_edge_hamiltonian(tk, tl, multiplicity, _edge_coeffs(coeffs, k, l), policy)
    return embed_local(h, [k, l], indexer)


def _sum_edges(edges, spins: SpinAssignment, coeffs, indexer, policy) -> sp.csr_matrix:
    dim = indexer.total_dim
    h = sp.csr_matrix((dim, dim))
    for k, l, m in edges:
        h = h + edge_hamiltonian(k, l, m, coeffs, indexer, policy)
    return h.tocsr()


def full_indexer(g: MultiGraph, s: SpinAssignment) -> BasisIndexer:
    return BasisIndexer.for_vertices(g.vertices, s.twice)


def full_hamiltonian(g: MultiGraph, s: SpinAssignment, coeffs: EdgeCoefficients | None = None,
                     policy: NumericPolicy = DEFAULT_POLICY, force: bool = False) -> sp.csr_matrix:
    ok, residual = check_uniqueness(g, s)
    if not ok:
        raise UniquenessViolatedError(
            f"2S != I.M (residual {residual.tolist()}); the uniqueness theorem does not apply"
        )
    isolated = [v for v in g.vertices if g.coordination(v) == 0]
    if isolated:
        raise UniquenessViolatedError(f"isolated vertices {isolated} carry no interaction")
    indexer = full_indexer(g, s)
    guard_dim(indexer.total_dim, policy, force)
    if coeffs is None:
        coeffs = default_coefficients(g, s)
    return _sum_edges(g.edges, s, coeffs, indexer, policy)


@dataclass
class BlockHamiltonian:
    operator: sp.csr_matrix
    indexer: BasisIndexer
    edges: tuple
    trivial: bool  # no internal edges (e.g. a single vertex): H_b = 0

    @property
    def dim(self) -> int:
        return self.indexer.total_dim


def block_indexer(cut: Cut, s: SpinAssignment) -> BasisIndexer:
    return BasisIndexer.for_vertices(cut.block, s.twice)


def block_hamiltonian(cut: Cut, s: SpinAssignment, coeffs: EdgeCoefficients | None = None,
                      policy: NumericPolicy = DEFAULT_POLICY, force: bool = False) -> BlockHamiltonian:
    """Sum of the edge terms lying entirely inside the block; cut edges never contribute."""
    indexer = block_indexer(cut, s)
    guard_dim(indexer.total_dim, policy, force)
    if coeffs is None:
        coeffs = default_coefficients(cut.graph, s)
    op = _sum_edges(cut.internal_edges, s, coeffs, indexer, policy)
    return BlockHamiltonian(op, indexer, cut.internal_edges, trivial=not cut.internal_edges)
