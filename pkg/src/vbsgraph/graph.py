"""Multigraphs with edge multiplicities, spin inference and block/environment cuts.

Graph file format (one directive per line, ``#`` starts a comment)::

    e <k> <l> <M>        edge k-l carrying M valence bonds
    v <id>               vertex declaration (isolated vertices)
    block <id> <id> ...  default block used by the CLI
    spin <id> <2S>       spin override, only meant for negative tests
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    BlockIsWholeGraphError,
    DuplicateEdgeError,
    EmptyBlockError,
    GraphSyntaxError,
    NonPositiveMultiplicityError,
    SelfLoopError,
    UnknownVertexError,
)

Edge = tuple[int, int, int]


@dataclass(frozen=True)
class MultiGraph:
    """Undirected multigraph; parallel bonds are folded into a multiplicity.

    ``edges`` holds ``(k, l, M)`` with ``k < l``, in the order they were given.
    """

    vertices: tuple[int, ...]
    edges: tuple[Edge, ...]
    default_block: tuple[int, ...] | None = None
    spin_overrides: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        verts = tuple(sorted(set(int(v) for v in self.vertices)))
        vset = set(verts)
        seen = set()
        norm = []
        for k, l, m in self.edges:
            k, l, m = int(k), int(l), int(m)
            if k == l:
                raise SelfLoopError(f"self-loop at vertex {k}")
            if m < 1:
                raise NonPositiveMultiplicityError(f"edge ({k},{l}) has multiplicity {m}")
            if k not in vset or l not in vset:
                raise UnknownVertexError(f"edge ({k},{l}) uses an undeclared vertex")
            key = (min(k, l), max(k, l))
            if key in seen:
                raise DuplicateEdgeError(f"edge {key} given twice; use the multiplicity instead")
            seen.add(key)
            norm.append((key[0], key[1], m))
        if any(v < 0 for v in verts):
            raise UnknownVertexError("vertex ids must be non-negative integers")
        if self.default_block is not None:
            for v in self.default_block:
                if v not in vset:
                    raise UnknownVertexError(f"block vertex {v} is not in the graph")
        for v in self.spin_overrides:
            if v not in vset:
                raise UnknownVertexError(f"spin override for unknown vertex {v}")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", tuple(norm))
        object.__setattr__(self, "spin_overrides", dict(self.spin_overrides))

    @classmethod
    def from_edges(cls, edges: Iterable, vertices: Iterable[int] = (), **kw) -> "MultiGraph":
        """Build from ``(k, l)`` or ``(k, l, M)`` tuples; endpoints are declared implicitly."""
        full = []
        verts = set(vertices)
        for e in edges:
            k, l = e[0], e[1]
            m = e[2] if len(e) > 2 else 1
            full.append((k, l, m))
            verts.update((k, l))
        return cls(tuple(verts), tuple(full), **kw)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def multiplicity(self, k: int, l: int) -> int:
        a, b = min(k, l), max(k, l)
        for x, y, m in self.edges:
            if (x, y) == (a, b):
                return m
        return 0

    def incident(self, v: int) -> list[Edge]:
        return [e for e in self.edges if v in (e[0], e[1])]

    def coordination(self, v: int) -> int:
        """Number of incident edge records (multiplicities not counted)."""
        return len(self.incident(v))

    def neighbors(self, v: int) -> list[int]:
        return sorted(e[1] if e[0] == v else e[0] for e in self.incident(v))

    @property
    def is_basic(self) -> bool:
        return all(m == 1 for _, _, m in self.edges)

    @property
    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        adj = {v: [] for v in self.vertices}
        for k, l, _ in self.edges:
            adj[k].append(l)
            adj[l].append(k)
        start = self.vertices[0]
        seen = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return len(seen) == len(self.vertices)

    def incidence_matrix(self) -> np.ndarray:
        """Vertex-edge incidence matrix, rows in vertex order, columns in edge order."""
        index = {v: i for i, v in enumerate(self.vertices)}
        inc = np.zeros((self.n_vertices, self.n_edges), dtype=np.int64)
        for j, (k, l, _) in enumerate(self.edges):
            inc[index[k], j] = 1
            inc[index[l], j] = 1
        return inc

    def multiplicity_vector(self) -> np.ndarray:
        return np.array([m for _, _, m in self.edges], dtype=np.int64)

    def subgraph(self, vertices: Iterable[int]) -> "MultiGraph":
        vs = set(vertices)
        return MultiGraph(
            tuple(vs), tuple(e for e in self.edges if e[0] in vs and e[1] in vs)
        )

    def to_text(self) -> str:
        lines = [f"v {v}" for v in self.vertices if self.coordination(v) == 0]
        lines += [f"e {k} {l} {m}" for k, l, m in self.edges]
        if self.default_block is not None:
            lines.append("block " + " ".join(map(str, self.default_block)))
        lines += [f"spin {v} {s}" for v, s in sorted(self.spin_overrides.items())]
        return "\n".join(lines) + "\n"


def parse_graph(text: str) -> MultiGraph:
    """Parse the line-oriented graph format; raises GraphError subclasses."""
    verts: set[int] = set()
    edges: list[Edge] = []
    pairs: dict[tuple[int, int], int] = {}
    block = None
    spins: dict[int, int] = {}

    def ints(tokens, lineno, n=None):
        try:
            vals = [int(t) for t in tokens]
        except ValueError:
            raise GraphSyntaxError(lineno, f"expected integers, got {' '.join(tokens)!r}") from None
        if n is not None and len(vals) != n:
            raise GraphSyntaxError(lineno, f"expected {n} integers, got {len(vals)}")
        return vals

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        if head == "e":
            k, l, m = ints(rest, lineno, 3)
            if k < 0 or l < 0:
                raise GraphSyntaxError(lineno, "vertex ids must be non-negative")
            if k == l:
                raise SelfLoopError(f"line {lineno}: self-loop at vertex {k}")
            if m < 1:
                raise NonPositiveMultiplicityError(f"line {lineno}: multiplicity {m}")
            key = (min(k, l), max(k, l))
            if key in pairs:
                raise DuplicateEdgeError(
                    f"line {lineno}: edge {key} already declared on line {pairs[key]}"
                )
            pairs[key] = lineno
            edges.append((k, l, m))
            verts.update((k, l))
        elif head == "v":
            (v,) = ints(rest, lineno, 1)
            if v < 0:
                raise GraphSyntaxError(lineno, "vertex ids must be non-negative")
            verts.add(v)
        elif head == "block":
            if not rest:
                raise GraphSyntaxError(lineno, "empty block directive")
            block = tuple(ints(rest, lineno))
        elif head == "spin":
            v, s = ints(rest, lineno, 2)
            if s < 0:
                raise GraphSyntaxError(lineno, "twice-spin must be non-negative")
            spins[v] = s
        else:
            raise GraphSyntaxError(lineno, f"unknown directive {head!r}")

    if block is not None:
        missing = [v for v in block if v not in verts]
        if missing:
            raise UnknownVertexError(f"block directive names unknown vertices {missing}")
    for v in spins:
        if v not in verts:
            raise UnknownVertexError(f"spin directive names unknown vertex {v}")
    g = MultiGraph(tuple(verts), tuple(edges), default_block=block, spin_overrides=spins)
    if not g.is_connected:
        warnings.warn("graph is disconnected; components are treated independently", stacklevel=2)
    return g


def load_graph(path) -> MultiGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())


@dataclass(frozen=True)
class SpinAssignment:
    """Spins stored doubled (``twice[v] = 2 S_v``) so half-integers stay exact."""

    twice: Mapping[int, int]
    overridden: bool = False

    def __getitem__(self, v: int) -> int:
        return self.twice[v]

    def spin(self, v: int) -> Fraction:
        return Fraction(self.twice[v], 2)

    def local_dim(self, v: int) -> int:
        return self.twice[v] + 1

    def vector(self, vertices: Iterable[int]) -> np.ndarray:
        return np.array([self.twice[v] for v in vertices], dtype=np.int64)

    def with_override(self, overrides: Mapping[int, int]) -> "SpinAssignment":
        new = dict(self.twice)
        new.update(overrides)
        return SpinAssignment(new, overridden=self.overridden or bool(overrides))


def infer_spins(g: MultiGraph, apply_overrides: bool = False) -> SpinAssignment:
    """2 S_l = sum of multiplicities of the edges incident to l."""
    twice = {v: 0 for v in g.vertices}
    for k, l, m in g.edges:
        twice[k] += m
        twice[l] += m
    s = SpinAssignment(twice)
    if apply_overrides and g.spin_overrides:
        s = s.with_override(g.spin_overrides)
    return s


def check_uniqueness(g: MultiGraph, s: SpinAssignment) -> tuple[bool, np.ndarray]:
    """Return ``(ok, residual)`` with ``residual = 2S - I.M`` in vertex order."""
    residual = s.vector(g.vertices) - g.incidence_matrix() @ g.multiplicity_vector()
    return bool(not residual.any()), residual


@dataclass(frozen=True)
class Cut:
    graph: MultiGraph
    block: tuple[int, ...]
    environment: tuple[int, ...]
    cut_edges: tuple[Edge, ...]
    internal_edges: tuple[Edge, ...]
    environment_edges: tuple[Edge, ...]
    boundary_block: tuple[int, ...]
    boundary_env: tuple[int, ...]

    @property
    def L(self) -> int:
        return len(self.boundary_block)

    @property
    def n_block(self) -> int:
        return len(self.block)

    def cut_multiplicity(self, v: int) -> int:
        """Sum of multiplicities of the cut edges incident to ``v``."""
        return sum(m for k, l, m in self.cut_edges if v in (k, l))

    def internal_multiplicity(self, v: int) -> int:
        edges = self.internal_edges if v in self.block else self.environment_edges
        return sum(m for k, l, m in edges if v in (k, l))

    def swapped(self) -> "Cut":
        return cut_graph(self.graph, self.environment)


def cut_graph(g: MultiGraph, block: Iterable[int]) -> Cut:
    bset = set(int(v) for v in block)
    if not bset:
        raise EmptyBlockError("block must contain at least one vertex")
    unknown = bset - set(g.vertices)
    if unknown:
        raise UnknownVertexError(f"block vertices {sorted(unknown)} are not in the graph")
    if len(bset) == g.n_vertices:
        raise BlockIsWholeGraphError("block must leave a nonempty environment")
    env = tuple(v for v in g.vertices if v not in bset)
    cut, inner, outer = [], [], []
    for e in g.edges:
        inb = (e[0] in bset) + (e[1] in bset)
        (outer, cut, inner)[inb].append(e)
    bb = tuple(sorted({v for e in cut for v in e[:2] if v in bset}))
    be = tuple(sorted({v for e in cut for v in e[:2] if v not in bset}))
    return Cut(g, tuple(sorted(bset)), env, tuple(cut), tuple(inner), tuple(outer), bb, be)


# ---------------------------------------------------------------------------
# standard graph families

def path_graph(n: int, multiplicities: Iterable[int] | None = None) -> MultiGraph:
    ms = list(multiplicities) if multiplicities is not None else [1] * (n - 1)
    if len(ms) != n - 1:
        raise ValueError("need n - 1 multiplicities")
    return MultiGraph.from_edges([(i, i + 1, m) for i, m in enumerate(ms)])


def cycle_graph(n: int, multiplicity: int = 1) -> MultiGraph:
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    return MultiGraph.from_edges([(i, (i + 1) % n, multiplicity) for i in range(n)])


def star_graph(leaves: int) -> MultiGraph:
    """K_{1,leaves} with the center labelled 0."""
    return MultiGraph.from_edges([(0, i, 1) for i in range(1, leaves + 1)])


def complete_graph(n: int) -> MultiGraph:
    return MultiGraph.from_edges([(i, j, 1) for i in range(n) for j in range(i + 1, n)])


def cayley_tree(z: int, depth: int) -> MultiGraph:
    """Bethe lattice fragment: root with z children, every other inner vertex has z - 1."""
    edges = []
    shell = [0]
    nxt = 1
    for d in range(depth):
        new_shell = []
        for u in shell:
            for _ in range(z if d == 0 else z - 1):
                edges.append((u, nxt, 1))
                new_shell.append(nxt)
                nxt += 1
        shell = new_shell
    return MultiGraph.from_edges(edges)


def spin_chain(block_multiplicities, left: int, right: int, pad: int = 1):
    """Open chain around a block of ``len(block_multiplicities) + 1`` sites.

    Layout: ``end -- pad sites -- block -- pad sites -- end``. Bonds on the left of
    the block carry ``left`` singlets, bonds on the right carry ``right``; the
    end vertices therefore have spin left/2 and right/2. Returns ``(graph, block)``.
    """
    inner = list(block_multiplicities)
    ms = [left] * (pad + 1) + inner + [right] * (pad + 1)
    g = path_graph(len(ms) + 1, ms)
    first = pad + 1
    block = tuple(range(first, first + len(inner) + 1))
    return g, block


def homogeneous_chain(twice_spin: int, n_block: int, pad: int = 1):
    """Spin-S chain with S bonds per edge (S integer; ends carry S/2)."""
    if twice_spin % 2:
        raise ValueError("homogeneous chains need an integer bulk spin")
    s = twice_spin // 2
    return spin_chain([s] * (n_block - 1), s, s, pad)
