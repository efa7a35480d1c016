from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from monadforge.exact_field import (DenseMatrix, DimensionMismatch, Field, FieldElement,
                                    FieldMismatch, GaussianField, GaussianRational, PrimeField,
                                    RationalField, kernel_array, rank_array, rref_array,
                                    solve_array)

small_ints = st.integers(-6, 6)


def matrices(max_side=5):
    return st.integers(1, max_side).flatmap(
        lambda r: st.integers(1, max_side).flatmap(
            lambda c: st.lists(st.lists(small_ints, min_size=c, max_size=c),
                               min_size=r, max_size=r)))


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_rank_matches_sympy_over_rationals(rows):
    Q = RationalField()
    M = DenseMatrix(Q, rows)
    assert M.rank() == sympy.Matrix(rows).rank()


@settings(max_examples=60, deadline=None)
@given(matrices(), st.sampled_from([PrimeField(), PrimeField(7), RationalField(), GaussianField()]))
def test_kernel_is_annihilated_and_rank_nullity(rows, F):
    arr = DenseMatrix(F, rows).data
    K = kernel_array(F, arr)
    assert K.shape == (arr.shape[1], arr.shape[1] - rank_array(F, arr))
    if K.shape[1]:
        assert not np.any(F.matmul(arr, K) != 0)
    assert rank_array(F, K) == K.shape[1]


@settings(max_examples=40, deadline=None)
@given(matrices(4))
def test_rref_is_idempotent_and_pivots_are_unit(rows):
    F = PrimeField(101)
    R, piv = rref_array(F, DenseMatrix(F, rows).data)
    R2, piv2 = rref_array(F, R)
    assert piv == piv2 and np.array_equal(R, R2)
    for i, c in enumerate(piv):
        assert R[i, c] == 1 and sum(R[:, c] != 0) == 1


def test_solve_consistent_and_inconsistent(field):
    A = DenseMatrix(field, [[1, 2, 3], [0, 1, 4]])
    x = A.solve([5, 6])
    assert [v.value for v in x] != []
    assert list(A.apply([v.value for v in x])) == [field.coerce(5), field.coerce(6)]
    B = DenseMatrix(field, [[1, 1], [1, 1]])
    assert B.solve([0, 1]) is None
    with pytest.raises(DimensionMismatch):
        solve_array(field, B.data, [1])


def test_prime_field_inverse_and_wraparound():
    F = PrimeField(32003)
    a = FieldElement(F, 12345)
    assert (a * a.inverse()).value == 1
    assert (FieldElement(F, 32002) + FieldElement(F, 1)).is_zero()
    with pytest.raises(ZeroDivisionError):
        FieldElement(F, 0).inverse()


def test_gaussian_arithmetic():
    z = GaussianRational(1, 2)
    w = GaussianRational(Fraction(1, 3), -1)
    assert z * z.inverse() == GaussianRational(1)
    assert (z * w).re == z.re * w.re - z.im * w.im
    assert z.conj() == GaussianRational(1, -2)
    assert z.norm() == 5


def test_mixing_fields_is_refused():
    a = DenseMatrix(PrimeField(), [[1]])
    b = DenseMatrix(RationalField(), [[1]])
    with pytest.raises(FieldMismatch):
        a @ b
    with pytest.raises(FieldMismatch):
        DenseMatrix(PrimeField(7), [[1]]) + DenseMatrix(PrimeField(11), [[1]])


def test_nonprime_modulus_rejected():
    with pytest.raises(ValueError):
        PrimeField(32001)


@pytest.mark.parametrize("spec,kind", [("prime:32003", "prime"), ("prime:7", "prime"),
                                       ("rational", "rational"), ("gaussian", "gaussian")])
def test_field_spec_and_json_roundtrip(spec, kind):
    F = Field.from_spec(spec)
    assert F.kind == kind
    assert Field.from_json(F.to_json()) == F


def test_bad_field_spec():
    with pytest.raises(ValueError):
        Field.from_spec("reals")


@pytest.mark.parametrize("text,value", [("3", Fraction(3)), ("-2/7", Fraction(-2, 7)),
                                        ("0", Fraction(0))])
def test_format_parse_roundtrip_rational(text, value):
    Q = RationalField()
    assert Q.parse(text) == value
    assert Q.parse(Q.format(value)) == value


@given(st.fractions(max_denominator=50), st.fractions(max_denominator=50))
def test_format_parse_roundtrip_gaussian(re, im):
    G = GaussianField()
    v = GaussianRational(re, im)
    assert G.parse(G.format(v)) == v


def test_gaussian_parse_forms():
    G = GaussianField()
    assert G.parse("1/2+3*i") == GaussianRational(Fraction(1, 2), 3)
    assert G.parse("-2") == GaussianRational(-2)


def test_matrix_product_associates(field):
    rng = np.random.default_rng(1)
    A, B, C = (DenseMatrix.random(field, 3, 3, rng) for _ in range(3))
    assert (A @ B) @ C == A @ (B @ C)
    assert (A - A).is_zero()
    assert (A @ B).transpose() == B.transpose() @ A.transpose()
