import time

import numpy as np
import pytest

from conftest import instanton
from monadforge.complexes import UnsupportedTerm, line
from monadforge.exact_field import DenseMatrix, GaussianField, PrimeField, RationalField
from monadforge.graded import HomogeneousForm, evaluate, variables
from monadforge.monad import (ComplexConditionFailed, GenerationFailed, Monad, NotValidated,
                              build_barth_monad, charpoly, cohomology, determinant,
                              dual_monad, field_roots, gen_instanton_syzygy,
                              gen_null_correlation, maximal_minors, validate_monad)

GOLDEN = {(0, 0): 0, (1, -1): 1, (1, -2): 0, (1, 0): 0, (0, 1): 5}


def planted(field):
    x = variables(field)
    z = HomogeneousForm.zero(field, 1)
    return Monad(field, line(1, -1), [line(4, 0)], line(1, 1),
                 [[x[0]], [x[1]], [x[2]], [x[0] + x[1]]], [[x[1], -x[0], z, z]])


@pytest.mark.parametrize("field", [PrimeField(), RationalField()])
def test_null_correlation_golden_table(field):
    M = gen_null_correlation(field)
    tab = cohomology(M, -3, 3)
    for (i, t), v in GOLDEN.items():
        assert tab.h(i, t) == v
    assert tab.euler_ok()
    assert (M.rank, M.c1, M.n, M.middle_dim) == (2, 0, 1, 4)


def test_null_correlation_is_self_dual(nc):
    assert cohomology(dual_monad(nc), -4, 2).entries == cohomology(nc, -4, 2).entries


def test_json_roundtrip(field):
    M = gen_null_correlation(field)
    again = Monad.from_json(M.to_json())
    assert again == M
    assert again.to_json() == M.to_json()


def test_noncomplex_rejected():
    F = PrimeField()
    x = variables(F)
    with pytest.raises(ComplexConditionFailed):
        Monad(F, line(1, -1), [line(4, 0)], line(1, 1), [[xi] for xi in x], [list(x)])


def test_wrong_degrees_rejected():
    F = PrimeField()
    x = variables(F)
    with pytest.raises(ValueError):
        Monad(F, line(1, -1), [line(4, 0)], line(1, 1), [[xi * xi] for xi in x],
              [[-x[1], x[0], -x[3], x[2]]])


def test_null_correlation_certified_at_degree_one(nc):
    rep = validate_monad(nc)
    assert rep.certified and not rep.refuted
    assert rep.A_injective.degree == 1 and rep.B_surjective.degree == 1
    assert rep.saturation_degree_used <= rep.d_max


@pytest.mark.parametrize("field", [PrimeField(), RationalField()])
def test_planted_defect_refuted_with_witness(field):
    M = planted(field)
    rep = validate_monad(M)
    assert rep.refuted and not rep.certified
    w = rep.A_injective.witness
    assert w is not None and any(v != 0 for v in w)
    # re-check: every entry of A vanishes at the witness
    assert all(evaluate(M.A[i][0], w).is_zero() for i in range(4))
    wb = rep.B_surjective.witness
    assert all(evaluate(M.B[0][i], wb).is_zero() for i in range(4))


def test_unvalidated_monad_refuses_cohomology():
    with pytest.raises(NotValidated):
        cohomology(planted(PrimeField()), -1, 1)


@pytest.mark.parametrize("n", [2, 3])
def test_generated_instantons(n):
    M = instanton(n)
    assert M.middle_dim == 2 * n + 2 and M.rank == 2 and M.c1 == 0
    rep = validate_monad(M)
    assert rep.certified and rep.saturation_degree_used <= rep.d_max
    tab = cohomology(M, -5, 3, report=rep)
    assert tab.h(1, -1) == n and tab.h(1, -2) == 0 and tab.h(0, 0) == 0
    assert tab.euler_ok()
    dual = cohomology(dual_monad(M), -5, 1, force=True)
    for t in range(-5, 2):
        for i in range(4):
            assert tab.h(i, t) == dual.h(3 - i, -4 - t)


def test_instanton_generation_is_deterministic():
    a = gen_instanton_syzygy(2, seed=11)
    b = gen_instanton_syzygy(2, seed=11)
    assert a == b


def test_generation_failure_reports_stats():
    with pytest.raises(GenerationFailed) as info:
        gen_instanton_syzygy(2, seed=0, max_retries=0)
    assert info.value.stats["attempts"] == 0


def test_barth_needs_exactly_one_of_J_or_B():
    F = PrimeField()
    x = variables(F)
    with pytest.raises(ValueError):
        build_barth_monad([[xi] for xi in x])


def test_determinant_and_minors():
    F = RationalField()
    x = variables(F)
    M = [[x[0], x[1]], [x[2], x[3]]]
    det = determinant(F, M)
    assert det == x[0] * x[3] - x[1] * x[2]
    assert determinant(F, [[x[0], x[1]], [x[0], x[1]]]) is None


def test_charpoly_and_roots_over_each_field():
    for F in (PrimeField(), RationalField(), GaussianField()):
        A = DenseMatrix(F, [[2, 0], [0, 3]]).data
        c = charpoly(F, A)
        roots = sorted(F.format(r) for r in field_roots(F, c))
        assert roots == sorted(F.format(F.coerce(v)) for v in (2, 3))
    G = GaussianField()
    # x^2 + 1 splits over Q(i) only
    assert len(field_roots(G, [G.coerce(1), G.zero, G.one])) == 2
    Q = RationalField()
    assert field_roots(Q, [Q.coerce(1), Q.zero, Q.one]) == []


def test_omega_middle_needs_extension_route(nc):
    from monadforge.extensions import extension_monad
    from monadforge.complexes import TwistTerm
    from monadforge.omega import OmegaSection
    s = OmegaSection.random(nc.field, 1, 2, np.random.default_rng(0))
    E = extension_monad(nc, TwistTerm("omega1", 1, 1), [s])
    with pytest.raises(UnsupportedTerm):
        cohomology(E, 0, 1, force=True)


def test_null_correlation_is_fast():
    t = time.perf_counter()
    for F in (PrimeField(), RationalField()):
        cohomology(gen_null_correlation(F), -3, 3)
    assert time.perf_counter() - t < 1.0


def test_maximal_minors_of_null_correlation(nc):
    minors = maximal_minors(nc.line_A())
    assert list(minors) == [1]
    assert sorted(tuple(v) for v in minors[1]) == sorted(
        tuple(x.coeffs) for x in variables(nc.field))


def test_double_dual_has_same_table(nc):
    M = instanton(2)
    tab = cohomology(M, -3, 2)
    assert cohomology(dual_monad(dual_monad(M)), -3, 2, force=True).entries == tab.entries


@pytest.mark.parametrize("a", [-2, 0, 1])
def test_degenerate_complex_gives_line_bundle_values(a):
    from math import comb
    F = RationalField()
    M = Monad(F, line(0, -1), [line(1, a)], line(0, 1), [[]], [])
    tab = cohomology(M, -6, 3, force=True)
    for t in range(-6, 4):
        s = a + t
        assert tab.row(t) == (comb(s + 3, 3) if s >= 0 else 0, 0, 0,
                              comb(-s - 1, 3) if s <= -4 else 0)


def test_chi_closed_form_matches_engine(nc):
    from monadforge.monad import chi
    tab = cohomology(nc, -5, 5)
    assert chi(nc, 0) == 0
    for t in range(-5, 6):
        assert chi(nc, t) == sum((-1) ** i * h for i, h in enumerate(tab.row(t)))


def test_null_correlation_B_matches_closed_form(nc):
    x = variables(nc.field)
    assert [nc.B[0][i] for i in range(4)] == [-x[1], x[0], -x[3], x[2]]
