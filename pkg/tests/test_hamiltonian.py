import numpy as np
import pytest
import scipy.sparse as sp
import sympy
from _oracles import cg_projector, exact_dot
from hypothesis import given, settings
from hypothesis import strategies as st

from vbsgraph.errors import (
    JOutOfRangeError,
    MissingCoefficientError,
    NonPositiveCoefficientError,
    UniquenessViolatedError,
)
from vbsgraph.graph import cut_graph, cycle_graph, infer_spins, parse_graph, path_graph, spin_chain
from vbsgraph.hamiltonian import (
    allowed_j2,
    block_hamiltonian,
    default_coefficients,
    full_hamiltonian,
    parse_coefficients,
    penalized_j2,
    projector_pi,
    random_coefficients,
    two_site_edge_hamiltonian,
    two_site_projector,
)
from vbsgraph.hilbert import BasisIndexer, total_spin_operators, two_site_dot


def test_pi2_spin1_matches_quadratic_polynomial_exactly():
    x = exact_dot(2, 2)
    eye = sympy.eye(9)
    # Casimir polynomial for J=2 over j in {0, 1}: (C - 0)(C - 2) / ((6 - 0)(6 - 2)), C = 2 S.S + 4
    cas = 2 * x + 4 * eye
    poly = (cas * (cas - 2 * eye)) / 24
    target = sympy.Rational(1, 6) * x * x + sympy.Rational(1, 2) * x + sympy.Rational(1, 3) * eye
    assert sympy.simplify(poly - target) == sympy.zeros(9, 9)

    dot = two_site_dot(2, 2)
    num = dot @ dot / 6 + dot / 2 + np.eye(9) / 3
    assert np.max(np.abs(two_site_projector(2, 2, 4) - num)) < 1e-14


def test_triplet_projector():
    p = two_site_projector(1, 1, 2)
    assert np.isclose(np.trace(p), 3)
    assert np.linalg.matrix_rank(p) == 3


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 5), st.integers(0, 5))
def test_projector_algebra(tk, tl):
    js = list(allowed_j2(tk, tl))
    ps = {j: two_site_projector(tk, tl, j) for j in js}
    total = sum(ps.values())
    assert np.max(np.abs(total - np.eye((tk + 1) * (tl + 1)))) < 1e-10
    for j, p in ps.items():
        assert np.max(np.abs(p @ p - p)) < 1e-10
        assert np.isclose(np.trace(p), j + 1)
        assert np.max(np.abs(p - cg_projector(tk, tl, j))) < 1e-10
        for j2, q in ps.items():
            if j2 != j:
                assert np.max(np.abs(p @ q)) < 1e-10


def test_projector_out_of_range():
    with pytest.raises(JOutOfRangeError):
        two_site_projector(2, 2, 6)
    with pytest.raises(JOutOfRangeError):
        two_site_projector(2, 1, 0)


def test_embedded_projector_trace():
    idx = BasisIndexer((0, 1, 2), (1, 2, 1))
    p = projector_pi(0, 1, 3, idx)
    # (2J+1) times the spectator dimension
    assert np.isclose(p.diagonal().sum(), 4 * 2)


def test_penalized_range():
    assert list(penalized_j2(2, 2, 1)) == [4]
    assert list(penalized_j2(3, 3, 2)) == [4, 6]
    assert list(penalized_j2(1, 1, 1)) == [2]


def test_edge_hamiltonian_examples():
    h = two_site_edge_hamiltonian(2, 2, 1, {4: 1.0})
    vals = np.linalg.eigvalsh(h)
    assert np.allclose(sorted(set(np.round(vals, 12))), [0, 1])
    assert np.linalg.matrix_rank(h) == 5

    h = two_site_edge_hamiltonian(3, 3, 2, {4: 1.0, 6: 1.0})
    assert np.linalg.matrix_rank(h) == 12
    assert np.min(np.linalg.eigvalsh(h)) > -1e-12


def test_edge_hamiltonian_coefficient_errors():
    with pytest.raises(NonPositiveCoefficientError):
        two_site_edge_hamiltonian(2, 2, 1, {4: 0.0})
    with pytest.raises(MissingCoefficientError):
        two_site_edge_hamiltonian(3, 3, 2, {6: 1.0})
    with pytest.raises(JOutOfRangeError):
        two_site_edge_hamiltonian(2, 2, 1, {4: 1.0, 2: 1.0})


def test_single_edge_ground_state_is_singlet():
    g = path_graph(2)
    h = full_hamiltonian(g, infer_spins(g)).toarray()
    vals, vecs = np.linalg.eigh(h)
    assert np.isclose(vals[0], 0) and np.isclose(vals[1], 1)
    singlet = np.array([0, 1, -1, 0]) / np.sqrt(2)
    assert np.isclose(abs(vecs[:, 0] @ singlet), 1)


def test_triangle_unique_zero_mode():
    g = cycle_graph(3)
    h = full_hamiltonian(g, infer_spins(g)).toarray()
    vals = np.linalg.eigvalsh(h)
    assert abs(vals[0]) < 1e-12 and vals[1] > 1e-3


def test_full_hamiltonian_su2_invariant():
    g, _ = spin_chain([2], 1, 1)
    s = infer_spins(g)
    h = full_hamiltonian(g, s, random_coefficients(g, s, rng=3))
    ops = total_spin_operators(BasisIndexer.for_vertices(g.vertices, s))
    for k in ("Sz", "Sp", "Sm"):
        comm = h @ ops[k] - ops[k] @ h
        assert comm.nnz == 0 or abs(comm).max() < 1e-10


def test_full_hamiltonian_refuses_override():
    g = parse_graph("e 0 1 1\nspin 0 3\n")
    with pytest.raises(UniquenessViolatedError):
        full_hamiltonian(g, infer_spins(g, apply_overrides=True))
    with pytest.warns(UserWarning):
        g = parse_graph("e 0 1 1\nv 2\n")
    with pytest.raises(UniquenessViolatedError):
        full_hamiltonian(g, infer_spins(g))


def test_block_hamiltonian_examples():
    g, block = spin_chain([1], 1, 1)
    s = infer_spins(g)
    hb = block_hamiltonian(cut_graph(g, block), s)
    assert len(hb.edges) == 1 and not hb.trivial
    ref = two_site_projector(2, 2, 4)
    assert np.max(np.abs(hb.operator.toarray() - ref)) < 1e-14

    hb = block_hamiltonian(cut_graph(g, [block[0]]), s)
    assert hb.trivial and hb.operator.nnz == 0 and hb.dim == 3

    g = cycle_graph(6)
    hb = block_hamiltonian(cut_graph(g, {0, 1, 2}), infer_spins(g))
    assert len(hb.edges) == 2
    assert np.min(np.linalg.eigvalsh(hb.operator.toarray())) > -1e-10
    assert sp.issparse(hb.operator)


def test_parse_coefficients_roundtrip():
    g = path_graph(3)
    s = infer_spins(g)
    c = parse_coefficients("A 1 0 3 2.5  # edge 0-1\nA 1 2 3 0.5\n")
    assert c == {(0, 1): {3: 2.5}, (1, 2): {3: 0.5}}
    assert default_coefficients(g, s) == {(0, 1): {3: 1.0}, (1, 2): {3: 1.0}}
    full_hamiltonian(g, s, c)
