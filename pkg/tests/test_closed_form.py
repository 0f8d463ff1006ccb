from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vbsgraph.closed_form import (
    ChainSpec,
    basic_chain_eigenvalues,
    decay_factor,
    fit_decay_structure,
    group_multiplets,
    lambda_lm,
    lambda_ls,
    verify_chain_spectrum,
)
from vbsgraph.errors import LOutOfRangeError, SpectrumMismatchError
from vbsgraph.pipeline import chain_labels


def test_basic_eigenvalue_examples():
    assert basic_chain_eigenvalues(2) == (Fraction(1, 3), Fraction(2, 9))
    assert basic_chain_eigenvalues(1) == (Fraction(0), Fraction(1, 3))
    l0, l1 = basic_chain_eigenvalues(40)
    assert abs(float(l0) - 0.25) < 1e-18 and abs(float(l1) - 0.25) < 1e-18


@given(st.integers(1, 60))
def test_basic_eigenvalues_sum_and_saturation(nb):
    l0, l1 = basic_chain_eigenvalues(nb)
    assert l0 + 3 * l1 == 1
    bound = Fraction(1, 3) ** nb
    assert abs(l0 - Fraction(1, 4)) <= bound and abs(l1 - Fraction(1, 4)) <= bound


def test_lambda_examples():
    assert lambda_ls(1, 1) == Fraction(-1, 3)
    assert lambda_ls(1, 2) == Fraction(-1, 2)
    assert lambda_lm(2, 2) == Fraction(1, 10)
    assert all(lambda_ls(0, s) == 1 for s in range(6))
    with pytest.raises(LOutOfRangeError):
        lambda_lm(3, 2)
    with pytest.raises(LOutOfRangeError):
        lambda_ls(-1, 2)


@given(st.integers(0, 12), st.data())
def test_lambda_forms_agree_and_shrink(m, data):
    l = data.draw(st.integers(0, m))
    assert lambda_ls(l, m) == lambda_lm(l, m)
    if l >= 1:
        assert abs(lambda_lm(l, m)) < 1


def test_decay_factor_examples():
    assert decay_factor(ChainSpec((2, 2), 1, 1), 2) == Fraction(1, 100)
    assert decay_factor(ChainSpec((1, 2, 1), 1, 1), 0) == 1
    assert decay_factor(ChainSpec.basic(5), 1) == Fraction(-1, 3) ** 4
    with pytest.raises(LOutOfRangeError):
        decay_factor(ChainSpec((1, 2), 1, 1), 2)


def test_chain_spec_structure():
    c = ChainSpec((2,), 1, 3)
    assert c.n_block == 2 and c.degeneracy == 8
    assert c.multiplets() == [2, 4]  # J from 1 to 2
    assert sum(j + 1 for j in c.multiplets()) == c.degeneracy
    g, block = c.graph()
    assert len(block) == 2
    with pytest.raises(ValueError):
        ChainSpec((0,), 1, 1)


@pytest.mark.parametrize("nb", [2, 3, 4, 5])
def test_basic_chain_matches_numerics(nb):
    rep = verify_chain_spectrum(ChainSpec.basic(nb), chain_labels(ChainSpec.basic(nb)), tol=1e-10)
    assert rep.ok, rep.table()
    assert len(rep.multiplets[0]) == 1 and len(rep.multiplets[2]) == 3


def test_spin2_chain_multiplets():
    chain = ChainSpec.homogeneous(2, 3)
    rep = verify_chain_spectrum(chain, chain_labels(chain), tol=1e-10)
    assert rep.ok, rep.table()
    assert sorted(len(v) for v in rep.multiplets.values()) == [1, 3, 5]


def test_121_chain_multiplets():
    chain = ChainSpec((2,), 1, 1)
    rep = verify_chain_spectrum(chain, chain_labels(chain), tol=1e-10)
    assert rep.ok, rep.table()
    assert {k: len(v) for k, v in rep.multiplets.items()} == {0: 1, 2: 3}


@pytest.mark.parametrize("internal, left, right", [((1, 2), 2, 1), ((2,), 1, 3), ((2, 2), 2, 2)])
def test_generic_chain_structure(internal, left, right):
    chain = ChainSpec(internal, left, right)
    rep = verify_chain_spectrum(chain, chain_labels(chain), tol=1e-8)
    assert rep.ok, rep.table()


def test_mismatch_raises_with_table():
    chain = ChainSpec.basic(2)
    wrong = [(0, 0.5), (2, 0.5 / 3), (2, 0.5 / 3), (2, 0.5 / 3)]
    rep = verify_chain_spectrum(chain, wrong)
    assert not rep.checks["basic_formula"]
    with pytest.raises(SpectrumMismatchError) as info:
        verify_chain_spectrum(chain, wrong, strict=True)
    assert "2J" in info.value.table


def test_group_multiplets():
    assert group_multiplets([(0, 0.1), (2, 0.3), (2, 0.3)]) == {0: [0.1], 2: [0.3, 0.3]}


def _multiplet_values(chain):
    groups = group_multiplets(chain_labels(chain))
    return {j2: float(np.mean(v)) for j2, v in groups.items()}


@pytest.mark.parametrize("ends", [(1, 1), (2, 2), (1, 2)])
def test_deviation_is_decay_product_combination(ends):
    left, right = ends
    internals = [(1,), (2,), (1, 1), (1, 2), (2, 1), (2, 2), (1, 1, 1), (2, 2, 1)]
    chains = [ChainSpec(m, left, right) for m in internals]
    fit = fit_decay_structure(chains, [_multiplet_values(c) for c in chains])
    assert fit.max_residual < 1e-8
    # the l = 1 channel is a linear function of J(J+1)
    assert fit.polynomial_residual()[1] < 1e-8


def test_fit_requires_shared_ends():
    with pytest.raises(ValueError):
        fit_decay_structure([ChainSpec((1,), 1, 1), ChainSpec((1,), 2, 1)], [{}, {}])


def test_homogeneous_decay_rate():
    # spin-1 chain: deviation shrinks by |lambda(1,1)| = 1/3 per added site
    devs = [abs(_multiplet_values(ChainSpec.basic(nb))[2] - 0.25) for nb in (2, 3, 4)]
    assert np.allclose([devs[1] / devs[0], devs[2] / devs[1]], 1 / 3, atol=1e-10)
