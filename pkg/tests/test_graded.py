from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monadforge.exact_field import PrimeField, RationalField
from monadforge.graded import (DegenerateLine, HomogeneousForm, LineRestrictor, basis_dim,
                               degree_of_length, evaluate, form_from_json, form_to_json,
                               monomials, multiplication_matrix, multiply, variables)

F = PrimeField()


@pytest.mark.parametrize("d", range(-2, 7))
def test_basis_dim_is_binomial(d):
    assert basis_dim(d) == (comb(d + 3, 3) if d >= 0 else 0)
    assert len(monomials(d)) == basis_dim(d)
    assert all(sum(m) == d for m in monomials(d))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 3), st.integers(0, 3), st.integers(0, 10 ** 6))
def test_multiplication_matrix_agrees_with_product(a, b, seed):
    rng = np.random.default_rng(seed)
    f = HomogeneousForm.random(F, a, rng)
    g = HomogeneousForm.random(F, b, rng)
    M = multiplication_matrix(f, b)
    assert list(F.matmul(M, g.coeffs.reshape(-1, 1)).ravel()) == list(multiply(f, g).coeffs)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 3), st.integers(0, 3), st.integers(0, 10 ** 6))
def test_evaluation_is_multiplicative(a, b, seed):
    rng = np.random.default_rng(seed)
    f, g = HomogeneousForm.random(F, a, rng), HomogeneousForm.random(F, b, rng)
    pt = [int(v) for v in rng.integers(0, F.p, 4)]
    assert evaluate(f * g, pt) == evaluate(f, pt) * evaluate(g, pt)


def test_variables_and_terms():
    x = variables(RationalField())
    f = x[0] * x[1] - x[2] * x[2]
    assert f.degree == 2
    assert dict(f.terms()) == {(1, 1, 0, 0): 1, (0, 0, 2, 0): -1}
    assert evaluate(f, [2, 3, 1, 0]).value == 5


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 4), st.integers(0, 10 ** 6))
def test_line_restriction_matches_substitution(d, seed):
    rng = np.random.default_rng(seed)
    f = HomogeneousForm.random(F, d, rng)
    p, q = ([int(v) for v in rng.integers(0, F.p, 4)] for _ in range(2))
    try:
        R = LineRestrictor(F, p, q)
    except DegenerateLine:
        return
    s, t = (int(v) for v in rng.integers(0, F.p, 2))
    point = [F.add(F.mul(s, a), F.mul(t, b)) for a, b in zip(p, q)]
    assert R.restrict(f).evaluate(s, t) == evaluate(f, point)


def test_degenerate_line():
    with pytest.raises(DegenerateLine):
        LineRestrictor(F, [1, 2, 3, 4], [2, 4, 6, 8])


def test_form_json_roundtrip(field):
    rng = np.random.default_rng(4)
    f = HomogeneousForm.random(field, 2, rng)
    assert form_from_json(field, form_to_json(f)) == f
    assert degree_of_length(10) == 2 and degree_of_length(11) is None


def test_negative_degree_is_zero():
    z = HomogeneousForm.zero(F, -1)
    assert z.is_zero() and z.coeffs.size == 0
    assert multiply(z, variables(F)[0]).degree == 0
