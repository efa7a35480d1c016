import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monadforge import connections as C
from monadforge import expr as ex

PTS = C.standard_points()
CENTER = (0.3, -0.2, 0.1, 0.0)


def test_standard_points_shape_and_radii():
    r = np.linalg.norm(PTS, axis=1)
    assert PTS.shape == (20, 4) and r.min() >= 0.5 and r.max() <= 3.0
    assert np.array_equal(PTS, C.standard_points())


def test_conventions():
    # quaternion relations and chirality blocks
    for a in range(3):
        assert np.allclose(C.TAU[a] @ C.TAU[a], np.eye(2))
    for mu in range(4):
        for nu in range(4):
            anti = C.GAMMA[mu] @ C.GAMMA[nu] + C.GAMMA[nu] @ C.GAMMA[mu]
            assert np.allclose(anti, 2 * (mu == nu) * np.eye(4))
    # etabar is anti-self-dual
    star = 0.5 * np.einsum("mnrs,ars->amn", C.EPS4, C.ETABAR)
    assert np.allclose(star, -C.ETABAR)


def test_bpst_is_antihermitian():
    assert C.bpst_connection(CENTER, 0.8).check_antihermitian(PTS)


def test_bpst_fd_curvature_matches_closed_form_and_is_asd():
    A = C.bpst_connection(CENTER, 1.2)
    for x in PTS:
        F = C.curvature(A, x, 1e-3)
        assert np.max(np.abs(F - C.bpst_curvature(x, CENTER, 1.2))) < 1e-6
        assert C.asd_residual(F) < 1e-6
        assert C.asd_residual(C.bpst_curvature(x, CENTER, 1.2)) < 1e-14


def test_richardson_ratio():
    A = C.bpst_connection(CENTER, 1.0)
    x = PTS[3]
    exact = C.bpst_curvature(x, CENTER, 1.0)
    e1 = np.max(np.abs(C.curvature(A, x, 0.05) - exact))
    e2 = np.max(np.abs(C.curvature(A, x, 0.025) - exact))
    assert 3.5 <= e1 / e2 <= 4.5


def test_fourth_order_curvature_is_sharper():
    A = C.bpst_connection()
    x = PTS[0]
    exact = C.bpst_curvature(x)
    assert (np.max(np.abs(C.curvature(A, x, 0.05, order=4) - exact))
            < np.max(np.abs(C.curvature(A, x, 0.05) - exact)) / 10)


def test_curvature_scales_with_rho():
    x = np.array([0.2, 0.1, 0.0, 0.3])
    big = [np.max(np.abs(C.curvature(C.bpst_connection(rho=r), x, 1e-3))) for r in (20.0, 40.0)]
    assert big[0] / big[1] == pytest.approx(4.0, rel=1e-3)


def test_flat_and_abelian_curvature():
    x = PTS[0]
    assert np.max(np.abs(C.curvature(C.flat_connection(2), x))) == 0
    # A = i x2 dx1 gives F_21 = i, F_12 = -i
    comps = [C.MatrixField.zero(1) for _ in range(4)]
    comps[1] = C.MatrixField(1, 1, [[ex.mul(ex.const(1j), ex.X[2])]])
    F = C.curvature(C.ConnectionForm(comps), x)
    assert F[2, 1, 0, 0] == pytest.approx(1j) and F[1, 2, 0, 0] == pytest.approx(-1j)
    assert np.allclose(F, -np.transpose(F, (1, 0, 2, 3)))


def test_bianchi_identity():
    assert C.bianchi_residual(C.bpst_connection(CENTER), PTS[5]) < 1e-5


def random_gauge(seed):
    return C.smooth_su2_gauge(seed)


def test_gauge_covariance_of_curvature_and_density():
    A = C.bpst_connection(CENTER, 1.1)
    g = random_gauge(2)
    Ag = C.gauge_transform(A, g)
    for x in PTS[:8]:
        # fourth-order stencil: the gauged potential has large third derivatives
        F, Fg, gx = C.curvature(A, x, order=4), C.curvature(Ag, x, order=4), g(x)
        assert np.max(np.abs(Fg - gx @ F @ np.linalg.inv(gx))) < 1e-6
        assert abs(C.topological_density(Fg) - C.topological_density(F)) < 1e-8


def test_trivial_gauges():
    A = C.bpst_connection()
    x = PTS[1]
    ident = C.MatrixField.constant(np.eye(2))
    assert np.allclose(C.gauge_transform(A, ident)(x), A(x))
    g0 = np.array([[0, 1j], [1j, 0]])
    expect = np.array([g0 @ a @ np.linalg.inv(g0) for a in A(x)])
    assert np.allclose(C.gauge_transform(A, C.MatrixField.constant(g0))(x), expect)


def test_singular_gauge_rejected():
    g = C.MatrixField.constant([[1, 1], [1, 1]])
    with pytest.raises(C.SingularGauge):
        C.gauge_transform(C.bpst_connection(), g)(PTS[0])


def test_block_assembly_commutes_with_diagonal_gauge():
    rng = np.random.default_rng(0)
    phi1 = C.MatrixField.constant(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    phi2 = C.MatrixField.constant(rng.normal(size=(2, 2)))
    res = C.block_gauge_residual(C.bpst_connection(CENTER), C.flat_connection(2), phi1, phi2,
                                 random_gauge(3), random_gauge(4), PTS[:4])
    assert res < 1e-6


def test_block_assembly_trivial_cases():
    A = C.bpst_connection()
    x = PTS[2]
    zero = C.MatrixField.zero(2)
    B = C.assemble_block_connection(A, A, zero, zero)(x)
    assert np.max(np.abs(B[:, :2, 2:])) == 0 and np.max(np.abs(B[:, 2:, :2])) == 0
    F = C.curvature(C.assemble_block_connection(A, A, zero, zero), x)
    assert np.max(np.abs(F[:, :, :2, 2:])) == 0
    flat = C.flat_connection(2)
    const = C.MatrixField.constant([[1, 2], [3, 4]])
    assert np.max(np.abs(C.assemble_block_connection(flat, flat, const, const)(x))) < 1e-12


def test_block_curvature_top_left_identity():
    """Top-left block = F(n1) + (D phi1) ^ (D phi2)."""
    A = C.bpst_connection()
    flat = C.flat_connection(2)
    phi1 = C.MatrixField(2, 2, [[ex.X[0], ex.ZERO], [ex.ONE, ex.X[1]]])
    phi2 = C.MatrixField(2, 2, [[ex.X[2], ex.ONE], [ex.ZERO, ex.X[3]]])
    conn = C.assemble_block_connection(A, flat, phi1, phi2)
    x = PTS[4]
    F = C.curvature(conn, x)
    Bx = conn(x)
    d1, d2 = Bx[:, :2, 2:], Bx[:, 2:, :2]
    wedge = np.einsum("mij,njk->mnik", d1, d2) - np.einsum("nij,mjk->mnik", d1, d2)
    assert np.max(np.abs(F[:, :, :2, :2] - (C.curvature(A, x) + wedge))) < 1e-6


def test_rank_mismatch():
    with pytest.raises(C.RankMismatch):
        C.assemble_block_connection(C.flat_connection(2), C.flat_connection(1),
                                    C.MatrixField.zero(2, 2), C.MatrixField.zero(1, 2))


def test_dirac_trivial_and_flat_kernel():
    flat = C.flat_connection(2)
    const = C.SpinorField(2, lambda x: np.array([[1, 2j], [0, 3]]))
    assert C.dirac_residual(flat, const, PTS[0]) == 0
    c = np.array([1.0, 2j])
    psi = C.SpinorField(2, lambda x: np.outer((x[0] * np.eye(2) - 1j * x[1] * C.TAU[0]) @ c,
                                              [1, 0]))
    assert max(C.dirac_residual(flat, psi, x) for x in PTS) < 1e-10


def test_clifford_of_covariant_derivative_is_dirac():
    A = C.bpst_connection()
    psi = C.bpst_zero_mode()
    x = PTS[6]
    theta = C.covariant_derivative(A, psi, x)
    assert np.linalg.norm(C.clifford_multiply(theta)) == pytest.approx(C.dirac_residual(A, psi, x))


def test_zero_mode_residual_and_convergence():
    A = C.bpst_connection(CENTER, 0.9)
    psi = C.bpst_zero_mode(0.9, CENTER)
    coarse = [C.dirac_residual(A, psi, x, 0.02) for x in PTS]
    fine = [C.dirac_residual(A, psi, x, 0.01) for x in PTS]
    assert max(C.dirac_residual(A, psi, x) for x in PTS) < 1e-3
    assert 3.5 < max(coarse) / max(fine) < 4.5


def test_zero_mode_decay():
    psi = C.bpst_zero_mode()
    vals = [np.linalg.norm(psi(np.array([r, 0, 0, 0]))) * r ** 3 for r in np.linspace(5, 20, 7)]
    assert max(vals) < 2


def test_negative_control_spinor():
    A = C.bpst_connection()
    bad = C.SpinorField(2, lambda x: (x @ x + 1) ** -1.5 * np.eye(2))
    assert max(C.dirac_residual(A, bad, x) for x in PTS) > 0.1


def test_class_A_report():
    A = C.bpst_connection()
    rep = C.check_class_A_conditions(A, C.flat_connection(2), C.bpst_zero_mode(), PTS,
                                     quadruple_admissible=True)
    assert rep.dirac_max < 1e-3
    assert rep.to_json()["quadruple_admissible"] is True
    zero = C.SpinorField(2, lambda x: np.zeros((2, 2)))
    rep0 = C.check_class_A_conditions(A, C.flat_connection(2), zero, PTS[:3])
    assert rep0.dirac_max == 0
    B = rep0.connection(PTS[0])
    assert np.max(np.abs(B[:, :2, 2:])) == 0


def test_nonfinite_detected():
    psi = C.SpinorField(2, lambda x: np.full((2, 2), np.inf))
    with pytest.raises(C.NonFinite):
        C.dirac_residual(C.flat_connection(2), psi, PTS[0])
    singular = C.MatrixField(1, 1, [[ex.div(ex.ONE, ex.X[0])]])
    with pytest.raises((C.NonFinite, ZeroDivisionError)):
        singular(np.zeros(4))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 3), st.floats(-3, 3), st.floats(0.1, 2))
def test_expression_roundtrip(i, a, b):
    e = ex.div(ex.add(ex.mul(ex.const(a), ex.X[i]), ex.const(complex(0, b))),
               ex.add(ex.power(ex.X[(i + 1) % 4], 2), ex.const(b)))
    e2 = ex.from_sexpr(ex.to_sexpr(e))
    x = np.array([0.3, -1.2, 0.7, 2.0])
    assert ex.evaluate(e2, x) == pytest.approx(ex.evaluate(e, x))
    assert ex.to_sexpr(e2) == ex.to_sexpr(e)


def test_matrix_field_sexpr_roundtrip():
    A = C.bpst_connection(CENTER, 0.7)
    for comp in A.components:
        back = C.MatrixField.from_sexpr(comp.to_sexpr())
        assert np.array_equal(back(PTS[0]), comp(PTS[0]))


def test_lab_report_layout():
    rep = C.lab_report(count=6)
    assert set(rep) == {"points", "h", "residuals"}
    assert {"asd", "dirac", "gauge"} <= set(rep["residuals"])
    assert len(rep["points"]) == 6
