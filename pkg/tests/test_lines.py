import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monadforge.complexes import line
from monadforge.exact_field import FieldMismatch, GaussianRational, PrimeField
from monadforge.extensions import extension_monad
from monadforge.graded import DegenerateLine, HomogeneousForm
from monadforge.lines import (Line, SplittingType, check_real_triviality, real_line,
                              restrict_monad, scan_lines, sigma, splitting_type)

gauss = st.builds(GaussianRational, st.integers(-9, 9), st.integers(-9, 9))


def omega(F, p, q):
    """The symplectic pairing of the null correlation."""
    return F.add(F.add(F.mul(p[0], q[1]), F.neg(F.mul(p[1], q[0]))),
                 F.add(F.mul(p[2], q[3]), F.neg(F.mul(p[3], q[2]))))


def test_generic_and_isotropic_lines(nc):
    F = nc.field
    rng = np.random.default_rng(7)
    for _ in range(10):
        p = [int(v) for v in rng.integers(0, F.p, 4)]
        q = [int(v) for v in rng.integers(0, F.p, 4)]
        st_ = splitting_type(nc, Line(F, p, q))
        assert st_ == SplittingType((1, -1) if omega(F, p, q) == 0 else (0, 0))
        # make q isotropic to p: q' = q - (w(p,q)/w(p,e)) e with w(p,e) != 0
        e = next(e for e in np.eye(4, dtype=int).tolist() if omega(F, p, e) != 0)
        c = F.mul(omega(F, p, q), F.inv(omega(F, p, e)))
        q2 = [F.add(a, F.neg(F.mul(c, b))) for a, b in zip(q, e)]
        assert omega(F, p, q2) == 0
        assert splitting_type(nc, Line(F, p, q2)) == SplittingType((1, -1))


def test_splitting_type_predicts_restricted_sections(nc):
    F = nc.field
    L = Line(F, [1, 0, 0, 0], [0, 0, 1, 0])  # isotropic
    rc = restrict_monad(nc, L)
    st_ = splitting_type(nc, L, rc=rc)
    assert st_.degrees == (1, -1)
    for t in range(-2, 3):
        assert rc.h0(t) == st_.h0(t)
    assert st_.c1 == nc.c1 and st_.rank == nc.rank


def test_extension_by_minus_one_generic_type(nc):
    E = extension_monad(nc, line(1, -1), [HomogeneousForm.constant(nc.field, 1)])
    res = scan_lines(E, count=8, seed=2, pencils=0)
    assert res["generic"] == [0, 0, -1]


def test_scan_finds_verified_jumping_line(nc):
    res = scan_lines(nc, count=30, seed=1)
    assert res["generic"] == [0, 0]
    assert res["jumping"]
    F = nc.field
    for j in res["jumping"]:
        L = Line(F, [F.parse(v) for v in j["p"]], [F.parse(v) for v in j["q"]])
        assert j["type"] == [1, -1]
        assert splitting_type(nc, L).degrees == (1, -1)
        assert omega(F, L.p, L.q) == 0


def test_scan_is_deterministic(nc):
    assert scan_lines(nc, count=10, seed=3) == scan_lines(nc, count=10, seed=3)


@settings(max_examples=100, deadline=None)
@given(st.lists(gauss, min_size=4, max_size=4))
def test_sigma_squares_to_minus_identity(z):
    assert sigma(sigma(z)) == [-v for v in z]


@settings(max_examples=40, deadline=None)
@given(st.lists(gauss, min_size=4, max_size=4).filter(lambda z: any(z)))
def test_real_lines_are_sigma_invariant(z):
    L = real_line(z)
    assert L.contains(z) and L.contains(sigma(z))
    assert L.contains(sigma(L.p)) and L.contains(sigma(L.q))


def test_sigma_needs_gaussian_input():
    with pytest.raises(FieldMismatch):
        sigma([0.5, 1, 2, 3])


def test_degenerate_line_rejected():
    with pytest.raises(DegenerateLine):
        Line(PrimeField(), [1, 2, 3, 4], [2, 4, 6, 8])


def test_real_lines_trivial_for_null_correlation(nc_q):
    ok, info = check_real_triviality(nc_q, samples=8, seed=4)
    assert ok and info["checked"] == 8


def test_real_check_refuses_prime_field(nc):
    with pytest.raises(FieldMismatch):
        check_real_triviality(nc, samples=1)


def test_splitting_type_helpers():
    s = SplittingType((-1, 2, 0))
    assert s.degrees == (2, 0, -1) and s.c1 == 1 and s.dual().degrees == (1, 0, -2)
    assert s.h0(0) == 3 + 1 + 0 and not s.is_trivial()


def test_sigma_examples():
    one, zero = GaussianRational(1), GaussianRational(0)
    assert sigma([one, zero, zero, zero]) == [zero, one, zero, zero]
    rng = np.random.default_rng(0)
    for _ in range(100):
        z = [GaussianRational(int(a), int(b)) for a, b in rng.integers(-5, 6, (4, 2))]
        if not any(z):
            continue
        L = real_line(z)  # raises if sigma(z) were proportional to z
        assert L.contains(sigma(z))


def test_restriction_of_null_correlation(nc):
    F = nc.field
    rc = restrict_monad(nc, Line(F, [1, 0, 0, 0], [0, 1, 0, 0]))
    col = [row[0] for row in rc.A]
    assert [list(b.coeffs) for b in col] == [[1, 0], [0, 1], [0, 0], [0, 0]]


def test_dual_restriction_negates_type(nc):
    from monadforge.monad import dual_monad
    F = nc.field
    rng = np.random.default_rng(2)
    E = extension_monad(nc, line(1, -1), [HomogeneousForm.constant(F, 1)])
    for _ in range(3):
        p, q = ([int(v) for v in rng.integers(0, F.p, 4)] for _ in range(2))
        L = Line(F, p, q)
        assert splitting_type(dual_monad(E), L) == splitting_type(E, L).dual()


def test_line_bundle_sum_splitting_and_real_failure():
    from monadforge.exact_field import RationalField
    from monadforge.monad import Monad
    Q = RationalField()
    M = Monad(Q, line(0, -1), [line(1, 1), line(1, -1)], line(0, 1), [[], []], [])
    assert splitting_type(M, Line(Q, [1, 0, 0, 0], [0, 1, 2, 3])).degrees == (1, -1)
    ok, info = check_real_triviality(M, samples=3)
    assert not ok and info["type"] == [1, -1]
    single = Monad(Q, line(0, -1), [line(1, 2)], line(0, 1), [[]], [])
    assert splitting_type(single, Line(Q, [1, 0, 0, 0], [0, 0, 1, 0])).degrees == (2,)


def test_sigma_image_line_has_same_type(nc_q):
    from monadforge.lines import lift_to_gaussian
    M = lift_to_gaussian(nc_q)
    G = M.field
    rng = np.random.default_rng(5)
    for _ in range(4):
        p, q = ([GaussianRational(int(a), int(b)) for a, b in rng.integers(-4, 5, (4, 2))]
                for _ in range(2))
        try:
            L = Line(G, p, q)
            Ls = Line(G, sigma(p), sigma(q))
        except DegenerateLine:
            continue
        assert splitting_type(M, L) == splitting_type(M, Ls)
    # an isotropic line and its image both jump
    p = [GaussianRational(1), GaussianRational(0), GaussianRational(0), GaussianRational(0)]
    q = [GaussianRational(0), GaussianRational(0), GaussianRational(1, 1), GaussianRational(0)]
    assert splitting_type(M, Line(G, p, q)).degrees == (1, -1)
    assert splitting_type(M, Line(G, sigma(p), sigma(q))).degrees == (1, -1)
