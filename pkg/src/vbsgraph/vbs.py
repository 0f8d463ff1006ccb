"""Exact VBS states.

Two independent constructions of the full-graph state:

* ``vbs_schwinger``: expand the product of bond factors
  ``(a_k^+ b_l^+ - b_k^+ a_l^+)^M`` in Schwinger-boson occupations and map each
  vertex occupation ``(n_a, n_b)`` to ``|S, m=(n_a-n_b)/2>`` with weight
  ``sqrt(n_a! n_b!)``, so amplitudes are those of the Fock-space vector.
* ``vbs_symmetrized``: contract virtual spin-1/2 singlets with explicit per-vertex
  symmetrizers followed by the isometry from the symmetric subspace to spin S
  (all multiplicities 1 only).

The block VBS state and the boundary-monomial ground-space basis reuse the
Schwinger expansion.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb, factorial, prod
from typing import Mapping, Sequence

import numpy as np

from .errors import BlockTooSmallError, NotBasicModelError, UniquenessViolatedError
from .graph import Cut, MultiGraph, SpinAssignment, check_uniqueness
from .hilbert import BasisIndexer, StateVector, guard_dim
from .policy import DEFAULT_POLICY, NumericPolicy


class BosonPolynomial:
    """Homogeneous polynomial in (a_v^+, b_v^+) applied to the vacuum.

    ``coeffs[n_a(v0), n_a(v1), ...]`` holds the coefficient of
    ``prod_v a_v^{+ n_a} b_v^{+ (degree_v - n_a)}``; every vertex has a fixed total
    degree, so the b-occupation is implied. Coefficients are exact integers as
    long as they stay below 2**53.
    """

    def __init__(self, vertices: Sequence[int]):
        self.vertices = tuple(sorted(vertices))
        self._pos = {v: i for i, v in enumerate(self.vertices)}
        self.degrees = [0] * len(self.vertices)
        self.coeffs = np.ones((1,) * len(self.vertices))

    def _grow(self, axis_pad: dict[int, tuple[int, int]]) -> np.ndarray:
        widths = [axis_pad.get(i, (0, 0)) for i in range(self.coeffs.ndim)]
        return np.pad(self.coeffs, widths)

    def bond(self, k: int, l: int, power: int = 1) -> "BosonPolynomial":
        """Multiply by ``(a_k^+ b_l^+ - b_k^+ a_l^+)^power``."""
        i, j = self._pos[k], self._pos[l]
        for _ in range(power):
            old = self.coeffs
            new = np.zeros(tuple(n + (1 if ax in (i, j) else 0) for ax, n in enumerate(old.shape)))
            # a_k^+ b_l^+ raises n_a at k only
            src = [slice(None)] * old.ndim
            src[i], src[j] = slice(1, None), slice(0, -1)
            new[tuple(src)] += old
            src[i], src[j] = slice(0, -1), slice(1, None)
            new[tuple(src)] -= old
            self.coeffs = new
            self.degrees[i] += 1
            self.degrees[j] += 1
        return self

    def monomial(self, v: int, p: int, q: int) -> "BosonPolynomial":
        """Multiply by ``a_v^{+p} b_v^{+q}``."""
        i = self._pos[v]
        self.coeffs = self._grow({i: (p, q)})
        self.degrees[i] += p + q
        return self

    def copy(self) -> "BosonPolynomial":
        out = BosonPolynomial.__new__(BosonPolynomial)
        out.vertices = self.vertices
        out._pos = self._pos
        out.degrees = list(self.degrees)
        out.coeffs = self.coeffs.copy()
        return out

    def to_state(self) -> StateVector:
        """Map occupations to the spin basis, with spin ``degree_v / 2`` at every vertex."""
        t = self.coeffs
        for ax, deg in enumerate(self.degrees):
            na = np.arange(deg + 1)
            w = np.sqrt([float(factorial(a) * factorial(deg - a)) for a in na])
            shape = [1] * t.ndim
            shape[ax] = deg + 1
            # local index 0 is m = +S, i.e. n_a = degree
            t = np.flip(t * w.reshape(shape), axis=ax)
        indexer = BasisIndexer(self.vertices, tuple(self.degrees))
        amps = indexer.from_tensor(t).astype(float)
        return StateVector(amps, indexer)


def fix_phase(amplitudes: np.ndarray) -> np.ndarray:
    """Make the first nonzero amplitude real and positive."""
    nz = np.flatnonzero(amplitudes)
    if nz.size == 0:
        return amplitudes
    first = amplitudes[nz[0]]
    return amplitudes * (abs(first) / first)


def _require_unique(g: MultiGraph, s: SpinAssignment | None) -> None:
    if s is None:
        return
    ok, residual = check_uniqueness(g, s)
    if not ok:
        raise UniquenessViolatedError(f"spins violate 2S = I.M (residual {residual.tolist()})")


def schwinger_polynomial(vertices, edges) -> BosonPolynomial:
    poly = BosonPolynomial(vertices)
    for k, l, m in edges:
        poly.bond(k, l, m)
    return poly


def vbs_schwinger(g: MultiGraph, s: SpinAssignment | None = None,
                  policy: NumericPolicy = DEFAULT_POLICY, force: bool = False) -> StateVector:
    """Unnormalized VBS state; ``state.norm**2`` equals the Fock norm <VBS|VBS>."""
    _require_unique(g, s)
    twice = {v: 0 for v in g.vertices}
    for k, l, m in g.edges:
        twice[k] += m
        twice[l] += m
    guard_dim(prod(t + 1 for t in twice.values()), policy, force)
    state = schwinger_polynomial(g.vertices, g.edges).to_state()
    state.amplitudes = fix_phase(state.amplitudes)
    return state


# -- symmetrized singlet construction ---------------------------------------

def _symmetrizer(n: int) -> np.ndarray:
    """P = (1/n!) sum over permutations of n qubits, as a 2^n x 2^n matrix."""
    dim = 2**n
    eye = np.eye(dim).reshape((dim,) + (2,) * n)
    acc = np.zeros((dim,) + (2,) * n)
    perms = list(itertools.permutations(range(n)))
    for perm in perms:
        acc += eye.transpose((0,) + tuple(1 + p for p in perm))
    return acc.reshape(dim, dim) / len(perms)


def _dicke_isometry(n: int) -> np.ndarray:
    """Rows: normalized symmetric states with n_up = n, n-1, ..., 0 (i.e. m = S ... -S)."""
    out = np.zeros((n + 1, 2**n))
    for idx in range(2**n):
        bits = [(idx >> (n - 1 - b)) & 1 for b in range(n)]  # C order, qubit 0 most significant
        n_down = sum(bits)  # 0 = up, 1 = down
        out[n_down, idx] = 1.0
    return out / np.sqrt([comb(n, k) for k in range(n + 1)])[:, None]


def vbs_symmetrized(g: MultiGraph, policy: NumericPolicy = DEFAULT_POLICY,
                    force: bool = False) -> StateVector:
    """Product of edge singlets, symmetrized at every vertex and read out as spin z_l/2."""
    if not g.is_basic:
        raise NotBasicModelError("symmetrized construction needs all multiplicities equal to 1")
    z = {v: g.coordination(v) for v in g.vertices}
    guard_dim(prod(z[v] + 1 for v in g.vertices), policy, force)
    if 2 * g.n_edges + g.n_vertices > 50:
        raise NotImplementedError("too many virtual legs for a single einsum contraction")

    # labels: one per virtual qubit, then one per physical vertex
    singlet = np.array([[0.0, 1.0], [-1.0, 0.0]])  # |up_k down_l> - |down_k up_l>
    qubit_label = {}
    operands = []
    for e, (k, l, _) in enumerate(g.edges):
        qubit_label[(e, k)] = 2 * e
        qubit_label[(e, l)] = 2 * e + 1
        operands += [singlet, [2 * e, 2 * e + 1]]
    phys = {v: 2 * g.n_edges + i for i, v in enumerate(g.vertices)}
    for v in g.vertices:
        legs = [qubit_label[(e, v)] for e, (k, l, _) in enumerate(g.edges) if v in (k, l)]
        n = len(legs)
        w = _dicke_isometry(n) @ _symmetrizer(n)
        operands += [w.reshape((n + 1,) + (2,) * n), [phys[v]] + legs]
    out = [phys[v] for v in g.vertices]
    tensor = np.einsum(*operands, out, optimize="greedy")
    indexer = BasisIndexer(g.vertices, tuple(z[v] for v in g.vertices))
    amps = fix_phase(indexer.from_tensor(tensor))
    return StateVector(amps, indexer)


# -- block states --------------------------------------------------------------

def block_vbs(cut: Cut, s: SpinAssignment | None = None) -> StateVector:
    """Schwinger state of the internal bonds only; boundary vertices carry fewer bosons.

    A block without internal edges gives the one-dimensional vacuum state with
    ``meta["empty"] = True``.
    """
    poly = schwinger_polynomial(cut.block, cut.internal_edges)
    state = poly.to_state()
    state.meta["empty"] = not cut.internal_edges
    state.meta["boson_deficit"] = {v: cut.cut_multiplicity(v) for v in cut.block}
    return state


@dataclass
class GroundSpaceBasis:
    states: list[StateVector]
    exponents: list[dict[int, tuple[int, int]]]
    indexer: BasisIndexer
    min_singular_value: float

    def __len__(self) -> int:
        return len(self.states)

    def matrix(self, normalize: bool = True) -> np.ndarray:
        cols = [st.normalized() if normalize else st.amplitudes for st in self.states]
        return np.stack(cols, axis=1)

    def projector(self) -> np.ndarray:
        q, _ = np.linalg.qr(self.matrix())
        return q @ q.conj().T


def ground_space_basis(cut: Cut, s: SpinAssignment,
                       policy: NumericPolicy = DEFAULT_POLICY, force: bool = False) -> GroundSpaceBasis:
    """Block VBS state dressed with every boundary monomial of the right degree.

    Boundary vertex l gets ``a_l^{+p} b_l^{+q}`` with ``p + q`` equal to its cut
    multiplicity, giving ``prod_l (c_l + 1)`` states in the block's spin space.
    """
    if cut.n_block < 2:
        raise BlockTooSmallError("ground-space basis needs at least two block vertices")
    target = {v: s[v] for v in cut.block}
    guard_dim(prod(t + 1 for t in target.values()), policy, force)
    base = schwinger_polynomial(cut.block, cut.internal_edges)
    for v in cut.block:
        if base.degrees[base._pos[v]] + cut.cut_multiplicity(v) != target[v]:
            raise UniquenessViolatedError(f"vertex {v}: internal + cut bonds != 2S")
    boundary = cut.boundary_block
    choices = [range(cut.cut_multiplicity(v) + 1) for v in boundary]
    states, exps = [], []
    for combo in itertools.product(*choices):
        poly = base.copy()
        exp = {}
        for v, p in zip(boundary, combo):
            q = cut.cut_multiplicity(v) - p
            poly.monomial(v, p, q)
            exp[v] = (p, q)
        states.append(poly.to_state())
        exps.append(exp)
    indexer = BasisIndexer.for_vertices(cut.block, s.twice)
    mat = np.stack([st.normalized() for st in states], axis=1)
    smin = float(np.linalg.svd(mat.conj().T @ mat, compute_uv=False).min())
    return GroundSpaceBasis(states, exps, indexer, smin)
