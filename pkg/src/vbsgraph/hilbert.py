"""Product spin-z basis, local spin matrices and sparse embedding.

Basis convention: vertices in ascending id order, local index ``i`` on a spin-S
vertex is ``m = S - i`` (so index 0 is ``m = +S``), and the global index is
little-endian in the vertex order: the lowest vertex id is the fastest digit.
In numpy terms a state vector is ``tensor.reshape(-1, order="F")`` of a tensor
with one axis per vertex.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DimensionGuardError, DimensionMismatchError, NormZeroError
from .policy import DEFAULT_POLICY, NumericPolicy


def guard_dim(dim: int, policy: NumericPolicy = DEFAULT_POLICY, force: bool = False) -> None:
    if dim > policy.max_dim and not force:
        raise DimensionGuardError(
            f"Hilbert space dimension {dim} exceeds the guard {policy.max_dim} (use force)"
        )


@dataclass(frozen=True)
class BasisIndexer:
    vertices: tuple[int, ...]
    twice_spins: tuple[int, ...]

    def __post_init__(self):
        order = np.argsort(self.vertices, kind="stable")
        object.__setattr__(self, "vertices", tuple(int(self.vertices[i]) for i in order))
        object.__setattr__(self, "twice_spins", tuple(int(self.twice_spins[i]) for i in order))
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertices in indexer")
        if any(t < 0 for t in self.twice_spins):
            raise ValueError("twice-spins must be non-negative")

    @classmethod
    def for_vertices(cls, vertices: Iterable[int], spins: Mapping[int, int]) -> "BasisIndexer":
        vs = sorted(vertices)
        return cls(tuple(vs), tuple(spins[v] for v in vs))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(t + 1 for t in self.twice_spins)

    @property
    def total_dim(self) -> int:
        return prod(self.dims)

    @property
    def strides(self) -> tuple[int, ...]:
        out, acc = [], 1
        for d in self.dims:
            out.append(acc)
            acc *= d
        return tuple(out)

    def position(self, v: int) -> int:
        try:
            return self.vertices.index(v)
        except ValueError:
            raise DimensionMismatchError(f"vertex {v} is not part of this basis") from None

    def index(self, digits: Sequence[int]) -> int:
        if len(digits) != len(self.dims):
            raise DimensionMismatchError("digit tuple has the wrong length")
        idx = 0
        for d, s, x in zip(self.dims, self.strides, digits):
            if not 0 <= x < d:
                raise ValueError(f"digit {x} out of range for local dimension {d}")
            idx += x * s
        return idx

    def digits(self, index) -> np.ndarray:
        """Digits of one index (1d result) or of an index array (one row per index)."""
        index = np.asarray(index, dtype=np.int64)
        if np.any(index < 0) or np.any(index >= self.total_dim):
            raise ValueError("index out of range")
        out = [(index // s) % d for d, s in zip(self.dims, self.strides)]
        return np.stack(out, axis=-1)

    def magnetizations(self, v: int) -> np.ndarray:
        """2 m_v for every basis state (integer array of length total_dim)."""
        p = self.position(v)
        n = np.arange(self.total_dim, dtype=np.int64)
        return self.twice_spins[p] - 2 * ((n // self.strides[p]) % self.dims[p])

    def to_tensor(self, vec: np.ndarray) -> np.ndarray:
        return np.asarray(vec).reshape(self.dims, order="F")

    def from_tensor(self, tensor: np.ndarray) -> np.ndarray:
        return np.asarray(tensor).reshape(-1, order="F")


@dataclass
class StateVector:
    amplitudes: np.ndarray
    indexer: BasisIndexer
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes)
        if self.amplitudes.shape != (self.indexer.total_dim,):
            raise DimensionMismatchError(
                f"amplitudes have shape {self.amplitudes.shape}, basis has {self.indexer.total_dim}"
            )
        if not np.all(np.isfinite(self.amplitudes)):
            raise ValueError("state has non-finite amplitudes")

    @property
    def dim(self) -> int:
        return self.indexer.total_dim

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> np.ndarray:
        n = self.norm
        if n == 0:
            raise NormZeroError("zero state vector")
        return self.amplitudes / n


def local_spin_matrices(twice_spin: int) -> dict[str, np.ndarray]:
    """Dense spin-S matrices in the ``m = S, S-1, ..., -S`` basis.

    Keys: ``Sx, Sy, Sz, Sp, Sm``. ``Sy`` is complex, the others real.
    """
    if twice_spin < 0:
        raise ValueError("twice_spin must be non-negative")
    s = twice_spin / 2
    m = s - np.arange(twice_spin + 1)
    # <m+1|S+|m> sits at row i-1, column i
    ladder = np.sqrt(s * (s + 1) - m[1:] * (m[1:] + 1))
    sp_ = np.diag(ladder, 1)
    sm_ = sp_.T.copy()
    return {
        "Sz": np.diag(m),
        "Sp": sp_,
        "Sm": sm_,
        "Sx": 0.5 * (sp_ + sm_),
        "Sy": -0.5j * (sp_ - sm_),
    }


def embed_local(op, vertices: Sequence[int], indexer: BasisIndexer) -> sp.csr_matrix:
    """Embed an operator acting on ``vertices`` (in the given order) into the full space.

    ``op`` is indexed little-endian over ``vertices``: the first listed vertex is the
    fastest digit. The result acts as identity on all other vertices.
    """
    vertices = list(vertices)
    if len(set(vertices)) != len(vertices):
        raise DimensionMismatchError("repeated vertex in embedding")
    pos = [indexer.position(v) for v in vertices]
    ldims = [indexer.dims[p] for p in pos]
    lstr = [indexer.strides[p] for p in pos]
    dloc = prod(ldims)
    op = sp.coo_matrix(op)
    if op.shape != (dloc, dloc):
        raise DimensionMismatchError(f"operator shape {op.shape} does not match local dim {dloc}")

    n = np.arange(indexer.total_dim, dtype=np.int64)
    local = np.zeros_like(n)
    base = n.copy()
    acc = 1
    for d, s in zip(ldims, lstr):
        dig = (n // s) % d
        local += dig * acc
        base -= dig * s
        acc *= d
    # global offset for every local index
    loc_idx = np.arange(dloc, dtype=np.int64)
    offset = np.zeros(dloc, dtype=np.int64)
    acc = 1
    for d, s in zip(ldims, lstr):
        offset += ((loc_idx // acc) % d) * s
        acc *= d

    order = np.argsort(local, kind="stable")
    counts = np.bincount(local, minlength=dloc)
    starts = np.concatenate(([0], np.cumsum(counts)))
    rows, cols, vals = [], [], []
    for r, c, v in zip(op.row, op.col, op.data):
        if v == 0:
            continue
        members = order[starts[r]:starts[r + 1]]
        rows.append(members)
        cols.append(base[members] + offset[c])
        vals.append(np.full(members.size, v))
    dim = indexer.total_dim
    if not rows:
        return sp.csr_matrix((dim, dim), dtype=op.dtype)
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    )


def embed(site_op, vertex: int, indexer: BasisIndexer) -> sp.csr_matrix:
    return embed_local(site_op, [vertex], indexer)


def two_site_casimir(twice_k: int, twice_l: int) -> np.ndarray:
    """(S_k + S_l)^2 on the two-site space, k the fast digit."""
    a = local_spin_matrices(twice_k)
    b = local_spin_matrices(twice_l)
    sk, sl = twice_k / 2, twice_l / 2
    dot = np.kron(b["Sz"], a["Sz"]) + 0.5 * (np.kron(b["Sm"], a["Sp"]) + np.kron(b["Sp"], a["Sm"]))
    dk, dl = twice_k + 1, twice_l + 1
    return 2 * dot + (sk * (sk + 1) + sl * (sl + 1)) * np.eye(dk * dl)


def two_site_dot(twice_k: int, twice_l: int) -> np.ndarray:
    """S_k . S_l on the two-site space, k the fast digit."""
    a = local_spin_matrices(twice_k)
    b = local_spin_matrices(twice_l)
    return np.kron(b["Sz"], a["Sz"]) + 0.5 * (np.kron(b["Sm"], a["Sp"]) + np.kron(b["Sp"], a["Sm"]))


def edge_casimir(k: int, l: int, indexer: BasisIndexer) -> sp.csr_matrix:
    if k == l:
        raise DimensionMismatchError("edge endpoints must differ")
    tk = indexer.twice_spins[indexer.position(k)]
    tl = indexer.twice_spins[indexer.position(l)]
    return embed_local(two_site_casimir(tk, tl), [k, l], indexer)


def total_spin_operators(indexer: BasisIndexer) -> dict[str, sp.csr_matrix]:
    """Total Sz, S+, S- and the Casimir S_tot^2 on the whole basis."""
    dim = indexer.total_dim
    tot = {k: sp.csr_matrix((dim, dim)) for k in ("Sz", "Sp", "Sm")}
    for v, t in zip(indexer.vertices, indexer.twice_spins):
        mats = local_spin_matrices(t)
        for k in tot:
            tot[k] = tot[k] + embed(mats[k], v, indexer)
    tot["S2"] = (tot["Sz"] @ tot["Sz"] + 0.5 * (tot["Sp"] @ tot["Sm"] + tot["Sm"] @ tot["Sp"])).tocsr()
    return tot


def is_hermitian(op, tol: float = DEFAULT_POLICY.hermiticity_tol) -> bool:
    diff = op - op.conj().T
    if sp.issparse(diff):
        return diff.nnz == 0 or float(abs(diff).max()) <= tol
    return float(np.max(np.abs(diff), initial=0.0)) <= tol


def partial_trace(state, block: Sequence[int], indexer: BasisIndexer) -> np.ndarray:
    """Reduced density matrix on ``block`` (a Cut or a vertex list).

    ``state`` may be a StateVector, a state vector or a full density matrix. The
    result is normalised to unit trace and indexed in the block's canonical order.
    """
    if hasattr(block, "block"):
        block = block.block
    block = sorted(block)
    bpos = [indexer.position(v) for v in block]
    epos = [p for p in range(len(indexer.vertices)) if p not in bpos]
    dims = indexer.dims
    db = prod(dims[p] for p in bpos)
    de = prod(dims[p] for p in epos)
    arr = state.amplitudes if isinstance(state, StateVector) else np.asarray(state)

    if arr.ndim == 1:
        if arr.shape[0] != indexer.total_dim:
            raise DimensionMismatchError("state does not live on this basis")
        t = arr.reshape(dims, order="F").transpose(bpos + epos)
        mat = t.reshape(db, de, order="F")
        rho = mat @ mat.conj().T
    elif arr.ndim == 2:
        if arr.shape != (indexer.total_dim,) * 2:
            raise DimensionMismatchError("density matrix does not live on this basis")
        n = len(dims)
        t = arr.reshape(tuple(dims) * 2, order="F")
        perm = bpos + epos
        t = t.transpose(perm + [n + p for p in perm])
        t = t.reshape((db, de, db, de), order="F")
        rho = np.einsum("aebe->ab", t)
    else:
        raise DimensionMismatchError("state must be a vector or a square matrix")
    tr = np.trace(rho).real
    if tr <= 0:
        raise NormZeroError("cannot normalise a zero state")
    rho = rho / tr
    return 0.5 * (rho + rho.conj().T)
