"""Connections, curvature and the coupled Dirac operator on the flat chart R^4.

Conventions
-----------
* su(2) generators T_a = -(i/2) tau_a (tau the Pauli matrices).
* 't Hooft symbols (anti-self-dual): etabar^a_{0a} = -1, etabar^a_{a0} = 1,
  etabar^a_{bc} = eps_{abc} for b, c in 1..3; eps_{0123} = +1.
* sigma_mu = (1, i tau_k), sigmabar_mu = (1, -i tau_k),
  gamma_mu = [[0, sigma_mu], [sigmabar_mu, 0]].
* A spinor field is a 2 x r array (spinor rows, gauge columns); the gauge
  potential acts on columns, so nabla_mu psi = d_mu psi + psi A_mu^T, and the
  positive-chirality Dirac operator is sum_mu sigmabar_mu nabla_mu psi.
* Derivatives are central differences (order 2 by default).
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from . import expr as ex

__all__ = [
    "MatrixField", "ConnectionForm", "SpinorField", "NonFinite", "SingularGauge", "RankMismatch",
    "TAU", "T", "SIGMA", "SIGMABAR", "GAMMA", "ETABAR", "EPS4", "bpst_connection",
    "bpst_curvature", "curvature", "hodge_star", "asd_residual", "gauge_transform",
    "assemble_block_connection", "clifford_multiply", "covariant_derivative", "dirac_residual",
    "bpst_zero_mode", "check_class_A_conditions", "topological_density", "standard_points",
    "flat_connection", "block_gauge_residual", "bianchi_residual", "smooth_su2_gauge",
    "lab_report", "block_diag_field", "conjugate_field",
]


class NonFinite(ArithmeticError):
    pass


class SingularGauge(ValueError):
    pass


class RankMismatch(ValueError):
    pass


TAU = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex)
T = -0.5j * TAU
I2 = np.eye(2, dtype=complex)
SIGMA = np.array([I2] + [1j * t for t in TAU])
SIGMABAR = np.array([I2] + [-1j * t for t in TAU])
GAMMA = np.array([np.block([[np.zeros((2, 2)), s], [sb, np.zeros((2, 2))]])
                  for s, sb in zip(SIGMA, SIGMABAR)])


def _levi_civita():
    eps = np.zeros((4, 4, 4, 4))
    for perm in permutations(range(4)):
        p = list(perm)
        sign = 1
        for i in range(4):
            for j in range(i + 1, 4):
                if p[i] > p[j]:
                    sign = -sign
        eps[perm] = sign
    return eps


EPS4 = _levi_civita()


def _etabar():
    eta = np.zeros((3, 4, 4))
    for a in range(3):
        eta[a, 0, a + 1] = -1
        eta[a, a + 1, 0] = 1
        for b in range(3):
            for c in range(3):
                eta[a, b + 1, c + 1] = EPS4[0, a + 1, b + 1, c + 1]
    return eta


ETABAR = _etabar()


# ---------------------------------------------------------------------------
# fields


class MatrixField:
    """A rows x cols complex matrix depending on a chart point.

    Built either from a grid of expression trees (serializable) or from a
    Python callable (derived fields such as gauge transforms).
    """

    def __init__(self, rows, cols, exprs=None, func=None):
        if (exprs is None) == (func is None):
            raise ValueError("give expression trees or a callable")
        self.rows, self.cols = rows, cols
        self.exprs = exprs
        self.func = func
        if exprs is not None and (len(exprs) != rows or any(len(r) != cols for r in exprs)):
            raise RankMismatch("expression grid has the wrong shape")

    @classmethod
    def constant(cls, mat):
        mat = np.asarray(mat, dtype=complex)
        return cls(mat.shape[0], mat.shape[1],
                   [[ex.const(v) for v in row] for row in mat])

    @classmethod
    def zero(cls, rows, cols=None):
        cols = rows if cols is None else cols
        return cls(rows, cols, [[ex.ZERO] * cols for _ in range(rows)])

    @classmethod
    def from_callable(cls, rows, cols, func):
        return cls(rows, cols, func=func)

    @property
    def rank(self):
        return self.rows

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            if self.func is not None:
                out = np.asarray(self.func(x), dtype=complex)
            else:
                out = np.array([[ex.evaluate(e, x) for e in row] for row in self.exprs],
                               dtype=complex)
        if not np.all(np.isfinite(out)):
            raise NonFinite(f"field is not finite at {x.tolist()}")
        return out

    def to_sexpr(self):
        if self.exprs is None:
            raise TypeError("callable fields have no closed form")
        body = " ".join(ex.to_sexpr(e) for row in self.exprs for e in row)
        return f"(matrix {self.rows} {self.cols} {body})"

    @classmethod
    def from_sexpr(cls, text):
        toks = ex.tokenize(text)
        if toks[:2] != ["(", "matrix"]:
            raise ValueError("expected (matrix rows cols ...)")
        rows, cols = int(toks[2]), int(toks[3])
        pos, items = 4, []
        while toks[pos] != ")":
            node, pos = ex.parse_tokens(toks, pos)
            items.append(node)
        if len(items) != rows * cols:
            raise ValueError("wrong number of entries")
        return cls(rows, cols, [items[i * cols:(i + 1) * cols] for i in range(rows)])

    def derivative(self, x, mu, h, order=4):
        return _diff(self, x, mu, h, order)


def _diff(f, x, mu, h, order=2):
    x = np.asarray(x, dtype=float)
    e = np.zeros(4)
    e[mu] = h
    if order == 2:
        return (f(x + e) - f(x - e)) / (2 * h)
    if order == 4:
        return (-f(x + 2 * e) + 8 * f(x + e) - 8 * f(x - e) + f(x - 2 * e)) / (12 * h)
    raise ValueError("order must be 2 or 4")


@dataclass
class ConnectionForm:
    components: tuple  # four MatrixFields
    antihermitian: bool = False

    def __post_init__(self):
        self.components = tuple(self.components)
        if len(self.components) != 4:
            raise RankMismatch("a connection has four components")
        r = self.components[0].rows
        if any(c.rows != r or c.cols != r for c in self.components):
            raise RankMismatch("components must be square of one size")

    @property
    def rank(self):
        return self.components[0].rows

    def __call__(self, x):
        return np.array([c(x) for c in self.components])

    def check_antihermitian(self, points, tol=1e-12):
        for x in points:
            a = self(x)
            if np.max(np.abs(a + np.conj(np.transpose(a, (0, 2, 1))))) > tol:
                return False
        return True

    def dual(self):
        """The induced connection on the dual bundle: -A^T."""
        return ConnectionForm([MatrixField.from_callable(self.rank, self.rank,
                                                         lambda x, c=c: -c(x).T)
                               for c in self.components], self.antihermitian)

    def to_sexpr(self):
        return "(connection " + " ".join(c.to_sexpr() for c in self.components) + ")"


def flat_connection(r):
    return ConnectionForm([MatrixField.zero(r) for _ in range(4)], True)


@dataclass
class SpinorField:
    """x -> 2 x r array: positive-chirality spinor (rows) times gauge index (columns)."""

    rank: int
    func: object

    def __call__(self, x):
        with np.errstate(all="ignore"):
            out = np.asarray(self.func(np.asarray(x, dtype=float)), dtype=complex)
        if out.shape != (2, self.rank):
            raise RankMismatch(f"spinor value has shape {out.shape}")
        if not np.all(np.isfinite(out)):
            raise NonFinite(f"spinor is not finite at {list(x)}")
        return out


# ---------------------------------------------------------------------------
# BPST


def bpst_connection(center=(0.0, 0.0, 0.0, 0.0), rho=1.0):
    """Charge-one SU(2) instanton in regular gauge.

    A_mu = 2 etabar^a_{mu nu} (x - c)_nu / (|x - c|^2 + rho^2) T_a.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    y = [ex.sub(ex.X[i], ex.const(center[i])) for i in range(4)]
    den = ex.add(ex.total(ex.power(yi, 2) for yi in y), ex.const(rho * rho))
    comps = []
    for mu in range(4):
        grid = [[ex.ZERO, ex.ZERO], [ex.ZERO, ex.ZERO]]
        for a in range(3):
            lin = ex.total(ex.mul(ex.const(2 * ETABAR[a, mu, nu]), y[nu])
                           for nu in range(4) if ETABAR[a, mu, nu])
            for i in range(2):
                for j in range(2):
                    if T[a, i, j] != 0:
                        grid[i][j] = ex.add(grid[i][j], ex.mul(ex.const(T[a, i, j]), lin))
        comps.append(MatrixField(2, 2, [[ex.div(e, den) if e != ex.ZERO else e for e in row]
                                        for row in grid]))
    return ConnectionForm(comps, antihermitian=True)


def bpst_curvature(x, center=(0.0, 0.0, 0.0, 0.0), rho=1.0):
    """F_{mu nu} = -4 rho^2 / (|x-c|^2 + rho^2)^2 etabar^a_{mu nu} T_a."""
    y = np.asarray(x, dtype=float) - np.asarray(center, dtype=float)
    f = -4 * rho ** 2 / (y @ y + rho ** 2) ** 2
    return f * np.einsum("amn,aij->mnij", ETABAR, T)


# ---------------------------------------------------------------------------
# curvature and duality


def curvature(A, x, h=1e-3, order=2):
    """F_{mu nu} = d_mu A_nu - d_nu A_mu + [A_mu, A_nu], a (4, 4, r, r) array."""
    if h <= 0:
        raise ValueError("h must be positive")
    a = A(x)
    d = np.array([_diff(A, x, mu, h, order) for mu in range(4)])  # d[mu][nu]
    F = d - np.transpose(d, (1, 0, 2, 3))
    F = F + np.einsum("mij,njk->mnik", a, a) - np.einsum("nij,mjk->mnik", a, a)
    return F


def hodge_star(F):
    return 0.5 * np.einsum("mnrs,rsij->mnij", EPS4, F)


def asd_residual(F):
    """max |F + *F|; zero for anti-self-dual curvature."""
    return float(np.max(np.abs(F + hodge_star(F))))


def topological_density(F):
    """eps^{mu nu rho sigma} tr(F_{mu nu} F_{rho sigma}) / 4 (real part)."""
    return float(np.real(np.einsum("mnrs,mnij,rsji->", EPS4, F, F)) / 4)


# ---------------------------------------------------------------------------
# gauge changes and block assembly


def gauge_transform(A, g, h=1e-3, cond_max=1e12):
    """A'_mu = g A_mu g^-1 - (d_mu g) g^-1, derivatives of g by 4th-order differences."""
    def inv(x):
        gx = g(x)
        if np.linalg.cond(gx) > cond_max:
            raise SingularGauge(f"gauge matrix is singular at {list(x)}")
        return gx, np.linalg.inv(gx)

    def comp(mu):
        def f(x):
            gx, gi = inv(x)
            dg = _diff(g, x, mu, h, 4)
            return gx @ A.components[mu](x) @ gi - dg @ gi
        return MatrixField.from_callable(A.rank, A.rank, f)
    return ConnectionForm([comp(mu) for mu in range(4)], A.antihermitian)


def block_diag_field(g1, g2):
    r1, r2 = g1.rows, g2.rows

    def f(x):
        out = np.zeros((r1 + r2, r1 + r2), dtype=complex)
        out[:r1, :r1] = g1(x)
        out[r1:, r1:] = g2(x)
        return out
    return MatrixField.from_callable(r1 + r2, r1 + r2, f)


def assemble_block_connection(n1, n2, phi1, phi2, h=1e-3):
    """Connection on F1 + F2 with diagonal blocks n1, n2 and covariant derivatives of phi off it."""
    r1, r2 = n1.rank, n2.rank
    if (phi1.rows, phi1.cols) != (r1, r2) or (phi2.rows, phi2.cols) != (r2, r1):
        raise RankMismatch("phi1 must be r1 x r2 and phi2 r2 x r1")

    def comp(mu):
        def f(x):
            a1, a2 = n1.components[mu](x), n2.components[mu](x)
            p1, p2 = phi1(x), phi2(x)
            out = np.zeros((r1 + r2, r1 + r2), dtype=complex)
            out[:r1, :r1] = a1
            out[r1:, r1:] = a2
            out[:r1, r1:] = _diff(phi1, x, mu, h, 4) + a1 @ p1 - p1 @ a2
            out[r1:, :r1] = _diff(phi2, x, mu, h, 4) + a2 @ p2 - p2 @ a1
            return out
        return MatrixField.from_callable(r1 + r2, r1 + r2, f)
    return ConnectionForm([comp(mu) for mu in range(4)], False)


def conjugate_field(g1, phi, g2):
    """x -> g1 phi g2^-1."""
    return MatrixField.from_callable(phi.rows, phi.cols,
                                     lambda x: g1(x) @ phi(x) @ np.linalg.inv(g2(x)))


# ---------------------------------------------------------------------------
# spinors


def covariant_derivative(A, psi, x, h=1e-3, order=2, spin=None):
    """(nabla_mu psi)(x) for mu = 0..3, shape (4, 2, r).

    `spin` is an optional rank-2 connection acting on the spinor index.
    """
    out = []
    for mu in range(4):
        d = _diff(psi, x, mu, h, order)
        v = d + psi(x) @ A.components[mu](x).T
        if spin is not None:
            v = v + spin.components[mu](x) @ psi(x)
        out.append(v)
    return np.array(out)


def clifford_multiply(theta):
    """sum_mu sigmabar_mu theta_mu for a one-form theta valued in 2 x r spinors."""
    theta = np.asarray(theta)
    return np.einsum("mab,mbr->ar", SIGMABAR, theta)


def dirac_residual(A, psi, x, h=1e-3, order=2, spin=None):
    if h <= 0:
        raise ValueError("h must be positive")
    return float(np.linalg.norm(clifford_multiply(covariant_derivative(A, psi, x, h, order, spin))))


EPSILON = np.array([[0, 1], [-1, 0]], dtype=complex)


def bpst_zero_mode(rho=1.0, center=(0.0, 0.0, 0.0, 0.0)):
    """psi = rho (|x-c|^2 + rho^2)^(-3/2) eps, eps the 2x2 antisymmetric matrix."""
    c = np.asarray(center, dtype=float)

    def f(x):
        y = x - c
        return rho * (y @ y + rho ** 2) ** -1.5 * EPSILON
    return SpinorField(2, f)


def standard_points(count=20, seed=0, rmin=0.5, rmax=3.0):
    """Deterministic sample points with |x| in [rmin, rmax]."""
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(count, 4))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = rng.uniform(rmin, rmax, size=count)
    return dirs * radii[:, None]


@dataclass
class ClassAReport:
    by_construction: tuple
    dirac_max: float
    connection: ConnectionForm
    quadruple_admissible: bool | None

    def to_json(self):
        return {"conditions_by_construction": list(self.by_construction),
                "dirac_max": self.dirac_max,
                "quadruple_admissible": self.quadruple_admissible}


def check_class_A_conditions(n_tilde, n1, psi1, points, h=1e-3, quadruple_admissible=None):
    """Residual report for the class-A conditions on a spinor psi1 with values in S+ (x) F.

    psi2 = psi1^dagger; Theta_i are the covariant derivatives, which hold by
    construction; the Dirac condition is measured at the given points.
    """
    if n1.rank != 2 or psi1.rank != n_tilde.rank:
        raise RankMismatch("n1 acts on spinors (rank 2), psi1 must match n_tilde")
    dual = n_tilde.dual()
    phi1 = MatrixField.from_callable(2, psi1.rank, psi1)
    phi2 = MatrixField.from_callable(psi1.rank, 2, lambda x: np.conj(psi1(x)).T)
    worst = 0.0
    for x in points:
        worst = max(worst, dirac_residual(n_tilde, psi1, x, h, spin=n1))
    conn = assemble_block_connection(n1, dual, phi1, phi2, h)
    return ClassAReport(("i", "ii", "iii"), worst, conn, quadruple_admissible)


# ---------------------------------------------------------------------------
# consistency checks


def block_gauge_residual(n1, n2, phi1, phi2, g1, g2, points, h=1e-3):
    """Max curvature gap between assemble-then-gauge and gauge-then-assemble."""
    first = gauge_transform(assemble_block_connection(n1, n2, phi1, phi2, h),
                            block_diag_field(g1, g2), h)
    second = assemble_block_connection(gauge_transform(n1, g1, h), gauge_transform(n2, g2, h),
                                       conjugate_field(g1, phi1, g2),
                                       conjugate_field(g2, phi2, g1), h)
    return max(float(np.max(np.abs(curvature(first, x, h) - curvature(second, x, h))))
               for x in points)


def bianchi_residual(A, x, h=1e-3):
    """max |D_l F_mn + D_m F_nl + D_n F_lm| with F and its derivative by differences."""
    a = A(x)
    F0 = curvature(A, x, h, order=4)
    DF = np.array([_diff(lambda y: curvature(A, y, h, order=4), x, lam, h)
                   + np.einsum("ij,mnjk->mnik", a[lam], F0)
                   - np.einsum("mnij,jk->mnik", F0, a[lam]) for lam in range(4)])
    cyc = DF + np.transpose(DF, (1, 2, 0, 3, 4)) + np.transpose(DF, (2, 0, 1, 3, 4))
    return float(np.max(np.abs(cyc)))


def smooth_su2_gauge(seed=0):
    """exp of a bounded position-dependent su(2) element; invertible everywhere."""
    rng = np.random.default_rng(seed)
    k = rng.normal(size=(3, 4))
    phase = rng.uniform(0, 2 * np.pi, size=3)

    def g(x):
        v = 0.7 * np.sin(k @ x + phase)
        theta = np.linalg.norm(v)
        if theta == 0:
            return I2.copy()
        nhat = v / theta
        return np.cos(theta) * I2 + 1j * np.sin(theta) * np.einsum("a,aij->ij", nhat, TAU)
    return MatrixField.from_callable(2, 2, g)


def lab_report(center=(0.0, 0.0, 0.0, 0.0), rho=1.0, h=1e-3, count=20, seed=0):
    """Residual sweep over the standard points in the report JSON layout."""
    pts = standard_points(count, seed)
    A = bpst_connection(center, rho)
    asd = max(asd_residual(curvature(A, x, h)) for x in pts)
    closed = max(float(np.max(np.abs(curvature(A, x, h) - bpst_curvature(x, center, rho))))
                 for x in pts)
    psi = bpst_zero_mode(rho, center)
    dirac = max(dirac_residual(A, psi, x, h) for x in pts)
    rng = np.random.default_rng(seed)
    phi1 = MatrixField.constant(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    phi2 = MatrixField.constant(rng.normal(size=(2, 2)))
    gauge = block_gauge_residual(A, flat_connection(2), phi1, phi2, smooth_su2_gauge(seed),
                                 smooth_su2_gauge(seed + 1), pts[:5], h)
    return {"points": pts.tolist(), "h": h,
            "residuals": {"asd": asd, "closed_form": closed, "dirac": dirac, "gauge": gauge}}
