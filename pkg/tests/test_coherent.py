import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vbsgraph.coherent import (
    SphereSample,
    coherent_state,
    identity_resolution_check,
    identity_resolution_quadrature,
    mc_partition,
)
from vbsgraph.errors import InsufficientSamplesError, UniquenessViolatedError
from vbsgraph.graph import MultiGraph, cycle_graph, infer_spins, parse_graph, path_graph, star_graph
from vbsgraph.hilbert import local_spin_matrices
from vbsgraph.vbs import vbs_schwinger


def test_poles_and_equator():
    for twice in range(6):
        up = coherent_state(twice, 0.0, 0.3)
        assert abs(up[0]) == pytest.approx(1.0) and np.allclose(up[1:], 0)
        down = coherent_state(twice, np.pi, 0.3)
        assert abs(down[-1]) == pytest.approx(1.0) and np.allclose(down[:-1], 0, atol=1e-15)
    half = coherent_state(1, np.pi / 2, 0.0)
    assert np.allclose(half, [1 / np.sqrt(2), 1 / np.sqrt(2)])


def test_angle_validation():
    with pytest.raises(ValueError):
        coherent_state(2, -0.1, 0.0)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10), st.floats(0, np.pi), st.floats(0, 2 * np.pi))
def test_norm_and_direction(twice, theta, phi):
    z = coherent_state(twice, theta, phi)
    assert abs(np.linalg.norm(z) - 1) < 1e-14
    if twice:
        m = local_spin_matrices(twice)
        n = SphereSample(np.array(theta), np.array(phi)).unit_vector
        expect = [np.vdot(z, m[k] @ z).real for k in ("Sx", "Sy", "Sz")]
        # with S+ = a^+ b the half-angle phases put <S> at azimuth -phi
        assert np.allclose(expect, twice / 2 * n * [1, -1, 1], atol=1e-12)


def test_sphere_sample_invariants():
    rng = np.random.default_rng(0)
    smp = SphereSample(np.arccos(rng.uniform(-1, 1, 100)), rng.uniform(0, 2 * np.pi, 100))
    u, v = smp.spinor
    assert np.allclose(abs(u) ** 2 + abs(v) ** 2, 1, atol=1e-15)
    assert np.allclose(np.linalg.norm(smp.unit_vector, axis=-1), 1, atol=1e-14)


def test_identity_resolution():
    assert identity_resolution_check(1, 10**6, seed=4) < 5e-3
    for twice in range(0, 9):
        assert identity_resolution_quadrature(twice) < 1e-12
    with pytest.raises(InsufficientSamplesError):
        identity_resolution_check(1, 0, seed=0)


@pytest.mark.parametrize(
    "g",
    [path_graph(2), path_graph(3), cycle_graph(3), path_graph(3, [2, 1]), star_graph(3)],
    ids=["edge", "path3", "triangle", "path3-m21", "star3"],
)
def test_partition_matches_exact_norm(g):
    s = infer_spins(g)
    exact = vbs_schwinger(g, s).norm ** 2
    est = mc_partition(g, s, 200_000, seed=11)
    assert est.within(exact, 5.0), (est, exact)
    assert est.sample_count == 200_000 and np.isfinite(est.standard_error)


def test_single_edge_exact_value_is_two():
    assert np.isclose(vbs_schwinger(path_graph(2)).norm ** 2, 2)


def test_unbiased_over_seeds():
    g = path_graph(2)
    s = infer_spins(g)
    ests = [mc_partition(g, s, 20_000, seed=k) for k in range(30)]
    mean = np.mean([e.mean for e in ests])
    err = np.sqrt(np.sum([e.standard_error**2 for e in ests])) / len(ests)
    assert abs(mean - 2) <= 3 * err


def test_deterministic_across_threads():
    g = cycle_graph(3)
    s = infer_spins(g)
    a = mc_partition(g, s, 300_000, seed=5, threads=1)
    b = mc_partition(g, s, 300_000, seed=5, threads=4)
    assert a == b
    c = mc_partition(g, s, 300_000, seed=6)
    assert c.mean != a.mean


def test_partition_errors():
    g = path_graph(2)
    with pytest.raises(InsufficientSamplesError):
        mc_partition(g, infer_spins(g), 0, seed=0)
    g = parse_graph("e 0 1 1\nspin 0 3\n")
    with pytest.raises(UniquenessViolatedError):
        mc_partition(g, infer_spins(g, apply_overrides=True), 100, seed=0)


def test_double_bond_weight():
    # M = 2 on a single edge: two spin-1 sites, norm 12
    g = MultiGraph.from_edges([(0, 1, 2)])
    s = infer_spins(g)
    est = mc_partition(g, s, 200_000, seed=2)
    assert est.within(12.0)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 8), st.tuples(*[st.floats(0, np.pi), st.floats(0, 2 * np.pi)] * 2))
def test_overlap_formula(twice, angles):
    t1, p1, t2, p2 = angles
    a = coherent_state(twice, t1, p1)
    b = coherent_state(twice, t2, p2)
    n1 = SphereSample(np.array(t1), np.array(p1)).unit_vector
    n2 = SphereSample(np.array(t2), np.array(p2)).unit_vector
    assert abs(abs(np.vdot(a, b)) ** 2 - ((1 + n1 @ n2) / 2) ** twice) < 1e-12
