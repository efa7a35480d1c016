from math import comb

import numpy as np
import pytest

from monadforge.complexes import (FormMatrix, LineComplex, TwistTerm, chi_line, h0_line,
                                  h3_line, line)
from monadforge.exact_field import PrimeField, RationalField
from monadforge.extensions import term_table
from monadforge.graded import variables
from monadforge.omega import (KoszulViolation, OmegaSection, euler_map, koszul2_map,
                              section_basis)

F = PrimeField()


def binom(n, k):
    return comb(n, k) if n >= k >= 0 else 0


def bott(p, k, i):
    """Closed-form h^i(Omega^p(k)) on P^3."""
    if i == 0:
        return binom(k + 3 - p, k) * binom(k - 1, p) if k > p else 0
    if i == 3:
        return binom(-k + p, -k) * binom(-k - 1, 3 - p) if k < p - 3 else 0
    return 1 if (i == p and k == 0) else 0


@pytest.mark.parametrize("t", range(-7, 4))
def test_line_bundle_cohomology(t):
    assert h0_line(t) == binom(t + 3, 3)
    assert h3_line(t) == binom(-t - 1, 3)
    assert chi_line(t) == h0_line(t) - h3_line(t)
    assert line(2, 0).chi(t) == 2 * chi_line(t)


@pytest.mark.parametrize("p", [1, 2])
def test_omega_tables_match_bott(p):
    tab = term_table(F, TwistTerm(f"omega{p}", 1, 0), -6, 4)
    for t in range(-6, 5):
        assert tab.row(t) == tuple(bott(p, t, i) for i in range(4)), t
    assert tab.euler_ok()


def test_terms_report_rank_and_c1():
    assert TwistTerm("omega1", 1, 0).rank == 3 and TwistTerm("omega1", 1, 0).c1 == -4
    assert TwistTerm("omega2", 1, 2).rank == 3 and TwistTerm("omega2", 1, 2).c1 == -2
    assert line(3, 1).rank == 3 and line(3, 1).c1 == 3
    assert TwistTerm.from_json(line(2, -1).to_json()) == line(2, -1)


def test_koszul_maps_compose_to_zero():
    assert euler_map(F, 2).compose(koszul2_map(F, 2)).is_zero()


@pytest.mark.parametrize("p,k", [(1, 2), (1, 3), (2, 3), (2, 4)])
def test_random_omega_sections(p, k):
    rng = np.random.default_rng(k)
    s = OmegaSection.random(F, p, k, rng)
    assert s.relation_holds() and not s.is_zero()
    assert OmegaSection.from_json(F, s.to_json()) == s
    assert section_basis(F, p, k).shape[1] == bott(p, k, 0)


def test_koszul_violation_detected():
    x = variables(F)
    with pytest.raises(KoszulViolation):
        OmegaSection(F, 1, 2, [x[0], x[1], x[2], x[3]])
    # x1 e0 - x0 e1 is killed by the contraction
    assert OmegaSection(F, 1, 2, [x[1], -x[0], x[2] * 0, x[3] * 0]).relation_holds()


def test_short_exact_complex_hypercohomology():
    """0 -> O(-1) -> O^4 -> T(-1) -> 0 style check: Koszul tail of Euler sequence."""
    Q = RationalField()
    x = variables(Q)
    A = FormMatrix(Q, [-1], [0] * 4, [[xi] for xi in x])
    lc = LineComplex(Q, [(-1,), (0, 0, 0, 0)], [A], start=-1)
    for t in range(-3, 3):
        h = lc.hypercohomology(t)
        # the cokernel is T(-1): h0(T(-1)(t)) = 4 C(t+3,3) - C(t+2,3)
        assert h[0] == 4 * binom(t + 3, 3) - binom(t + 2, 3)
