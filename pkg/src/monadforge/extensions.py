"""Extensions 0 -> K -> E -> F -> 0 of a monad bundle F, and related maps.

An extension of F by K is given by a map f : W O(l) -> K.  Stacking f under
A (and padding B with zeros) gives a monad for E.  Two maps differing by
h.A for h : V -> K give isomorphic extensions, so the class of f lives in
Hom(W O(l), K) / A^t Hom(V, K).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .complexes import (DegreeMismatch, FormMatrix, LineComplex, UnsupportedTerm,
                        chi_polynomial, line)
from .exact_field import kernel_array, rank_array, rref_array
from .graded import (HomogeneousForm, basis_dim, form_from_json, form_to_json,
                     multiplication_matrix, variables)
from .monad import (CohomologyTable, Monad, NotValidated, chi, dual_monad, table_of_complex,
                    validate_monad)
from .omega import OmegaSection

__all__ = [
    "ExtensionClass", "TowerSpec", "OmegaSection", "RangeError", "ShapeError",
    "StabilityViolation", "StageFailed", "class_of_f", "extension_monad", "cohomology_ext",
    "fomega_table", "m_map_euler", "admissible_quadruples", "stability_check", "build_tower",
    "term_table", "les_ranks", "StabilityReport",
]


class RangeError(ValueError):
    pass


class ShapeError(ValueError):
    pass


class StabilityViolation(ValueError):
    pass


class StageFailed(ValueError):
    def __init__(self, stage, report):
        super().__init__(f"tower stage {stage} failed validation: {report.to_json()}")
        self.stage = stage
        self.report = report


# ---------------------------------------------------------------------------
# extension classes


def _stack(field, forms, twists):
    parts = [f.coeffs if basis_dim(d) else field.zeros(0) for f, d in zip(forms, twists)]
    return np.concatenate(parts) if parts else field.zeros(0)


def _unstack(field, vec, twists):
    out, pos = [], 0
    for d in twists:
        k = basis_dim(d)
        out.append(HomogeneousForm(field, d, vec[pos:pos + k]) if d >= 0
                   else HomogeneousForm.zero(field, d))
        pos += k
    return out


def _reduce(field, R, pivots, v):
    """Canonical representative of v modulo the row space of the rref R."""
    v = np.array(v, dtype=field.dtype, copy=True)
    for i, c in enumerate(pivots):
        if v[c] != 0:
            v = field.normalize(v - R[i] * v[c])
    return v


class ExtensionClass:
    """Coset of a representative in W*(x)S_{k-l} modulo the gauge image."""

    def __init__(self, field, k, degree, n, representative, image_basis):
        self.field, self.k, self.degree, self.n = field, k, degree, n
        self.image_basis = image_basis  # rref rows
        R, piv = (rref_array(field, image_basis) if image_basis.shape[0]
                  else (image_basis, []))
        self._pivots = piv
        self.image_basis = R[:len(piv)]
        self.representative = _reduce(field, self.image_basis, piv, representative)
        self.representative.flags.writeable = False

    @property
    def ambient_dim(self):
        return self.n * basis_dim(self.degree)

    @property
    def quotient_dim(self):
        return self.ambient_dim - len(self._pivots)

    def is_zero(self):
        return not any(v != 0 for v in self.representative)

    def forms(self):
        return _unstack(self.field, self.representative, [self.degree] * self.n)

    def __eq__(self, other):
        if not isinstance(other, ExtensionClass):
            return NotImplemented
        return (self.field == other.field and self.k == other.k and self.n == other.n
                and np.array_equal(self.image_basis, other.image_basis)
                and np.array_equal(self.representative, other.representative))

    def __hash__(self):
        return hash((self.k, tuple(self.representative.tolist())))

    def to_json(self):
        tw = [self.degree] * self.n
        return {"k": self.k,
                "representative": [form_to_json(f) for f in self.forms()],
                "image_basis": [[form_to_json(f) for f in _unstack(self.field, row, tw)]
                                for row in self.image_basis]}

    @staticmethod
    def from_json(field, obj, left_twist=-1):
        k = int(obj["k"])
        degree = k - left_twist
        rep = [form_from_json(field, a, degree) for a in obj["representative"]]
        n = len(rep)
        tw = [degree] * n
        rows = [_stack(field, [form_from_json(field, a, degree) for a in r], tw)
                for r in obj["image_basis"]]
        img = (np.array(rows, dtype=field.dtype).reshape(len(rows), -1) if rows
               else field.zeros((0, n * basis_dim(degree))))
        return ExtensionClass(field, k, degree, n, _stack(field, rep, tw), img)

    def __repr__(self):
        return f"ExtensionClass(k={self.k}, zero={self.is_zero()})"


def gauge_image(M, k):
    """Rows spanning A^t(Hom(V, O(k))) inside W*(x)S_{k-l}; line middles only."""
    if M.has_omega:
        raise UnsupportedTerm("classes are defined for line middles")
    At = M.line_A().transpose()
    G = At.gamma(k)
    return G.T.copy()


def class_of_f(M, k, f):
    if k < -1:
        raise RangeError("k must be at least -1")
    degree = k - M.left.twist
    f = list(f)
    if len(f) != M.n:
        raise DegreeMismatch(f"f needs {M.n} entries")
    for e in f:
        if not e.is_zero() and e.degree != degree:
            raise DegreeMismatch(f"f entries must have degree {degree}")
    fixed = [e if e.degree == degree else HomogeneousForm.zero(M.field, degree) for e in f]
    rep = _stack(M.field, fixed, [degree] * M.n)
    return ExtensionClass(M.field, k, degree, M.n, rep, gauge_image(M, k))


def gauge_shift(M, k, h):
    """f-shift h.A for a row h of degree-k forms over the middle (line slots)."""
    n = M.n
    degree = k - M.left.twist
    out = []
    for j in range(n):
        acc = HomogeneousForm.zero(M.field, degree)
        for i, hi in zip(M.line_slots(), h):
            a = M.A[i][j]
            if not a.is_zero() and not hi.is_zero():
                acc = acc + hi * a
        out.append(acc)
    return out


# ---------------------------------------------------------------------------
# extension monads


def extension_monad(M, K, f):
    if K.mult != 1:
        raise ShapeError("extend by one term at a time")
    k = K.twist
    degree = k - M.left.twist
    f = list(f)
    if len(f) != M.n:
        raise DegreeMismatch(f"f needs {M.n} entries")
    if K.kind == "line":
        if k < -1:
            raise RangeError("line extensions need k >= -1")
        for e in f:
            if not isinstance(e, HomogeneousForm) or (not e.is_zero() and e.degree != degree):
                raise DegreeMismatch(f"f entries must be forms of degree {degree}")
    else:
        p = 1 if K.kind == "omega1" else 2
        if k < p:
            raise RangeError(f"Omega^{p}(k) extensions need k >= {p}")
        for e in f:
            if not isinstance(e, OmegaSection) or e.p != p or e.degree != degree:
                raise DegreeMismatch(f"f entries must be Omega^{p} sections of degree {degree}")
    A = [list(r) for r in M.A] + [f]
    B = [list(r) + [None] for r in M.B]
    return Monad(M.field, M.left, list(M.middle) + [K], M.right, A, B, None)


def cohomology_ext(M, t_min, t_max, force=False, d_max=None):
    """Table of a monad whose middle may contain Omega terms."""
    if not force:
        rep = validate_monad(M, d_max=d_max)
        if not rep.certified:
            raise NotValidated(f"monad not certified: {rep.to_json()}")
    return table_of_complex(M, t_min, t_max)


def term_table(field, K, t_min, t_max):
    """Cohomology of a single term, through the zero-map complex."""
    M = Monad(field, line(0, -1), [K], line(0, 1), [[] for _ in range(K.mult)], [])
    return table_of_complex(M, t_min, t_max)


def les_ranks(tE, tF, tK):
    """Connecting ranks r_i of H^i(F) -> H^(i+1)(K) forced by the long exact sequence.

    Returns {t: (r0, r1, r2)} or raises ValueError when no admissible ranks exist.
    """
    out = {}
    for t in tE.twists:
        r_prev = 0
        rs = []
        for i in range(3):
            r = tK.h(i, t) + tF.h(i, t) - r_prev - tE.h(i, t)
            if not 0 <= r <= min(tF.h(i, t), tK.h(i + 1, t)):
                raise ValueError(f"no consistent connecting map at H^{i}, t={t}")
            rs.append(r)
            r_prev = r
        if tE.h(3, t) != tK.h(3, t) + tF.h(3, t) - r_prev:
            raise ValueError(f"H^3 does not fit at t={t}")
        out[t] = tuple(rs)
    return out


# ---------------------------------------------------------------------------
# F (x) Omega^1 and the multiplication map


def fomega_complex(M):
    """Total complex of the monad tensored with 0 -> U O(-1) -> O -> 0."""
    if M.has_omega:
        raise UnsupportedTerm("needs line middles")
    fld = M.field
    xs = variables(fld)
    n, nr = M.n, M.right.mult
    A, B = M.line_A(), M.line_B()
    l, r = M.left.twist, M.right.twist
    mids = list(A.tgt)
    m = len(mids)
    # T^-1 = W(x)U O(l-1); T^0 = V(x)U O(a-1) + W O(l); T^1 = W*(x)U O(r-1) + V O(a); T^2 = W* O(r)
    t_m1 = [l - 1] * (4 * n)
    t0 = [a - 1 for a in mids for _ in range(4)] + [l] * n
    t1 = [r - 1] * (4 * nr) + mids
    t2 = [r] * nr

    def grid(rows, cols):
        return [[None] * cols for _ in range(rows)]
    d_1 = grid(len(t0), len(t_m1))
    for i in range(m):
        for j in range(n):
            for u in range(4):
                d_1[4 * i + u][4 * j + u] = A.entries[i][j]
    for j in range(n):
        for u in range(4):
            d_1[4 * m + j][4 * j + u] = -xs[u]
    d0 = grid(len(t1), len(t0))
    for q in range(nr):
        for i in range(m):
            for u in range(4):
                d0[4 * q + u][4 * i + u] = B.entries[q][i]
    for i in range(m):
        for u in range(4):
            d0[4 * nr + i][4 * i + u] = xs[u]
        for j in range(n):
            d0[4 * nr + i][4 * m + j] = A.entries[i][j]
    d1 = grid(len(t2), len(t1))
    for q in range(nr):
        for u in range(4):
            d1[q][4 * q + u] = -xs[u]
        for i in range(m):
            d1[q][4 * nr + i] = B.entries[q][i]
    maps = (FormMatrix(fld, t_m1, t0, d_1), FormMatrix(fld, t0, t1, d0),
            FormMatrix(fld, t1, t2, d1))
    return LineComplex(fld, (tuple(t_m1), tuple(t0), tuple(t1), tuple(t2)), maps, start=-1)


def fomega_table(M, t_min, t_max):
    lc = fomega_complex(M)
    entries = {}
    for t in range(t_min, t_max + 1):
        h = lc.hypercohomology(t)
        for i in range(4):
            entries[(i, t)] = h[i]
    # Omega^1 = 4 O(-1) - O in K-theory
    return CohomologyTable(3 * M.rank, 3 * M.c1 - 4 * M.rank, entries,
                           chi_polynomial(lambda t: 4 * chi(M, t - 1) - chi(M, t)))


def _h1_quotient(M, t):
    """rref rows and pivots of im B inside W*(x)S_{t+r}; H^1(F(t)) is the quotient."""
    fld = M.field
    G = M.line_B().gamma(t)
    R, piv = rref_array(fld, G.T.copy()) if G.size else (G.T, [])
    return R[:len(piv)], piv


def m_map_euler(M):
    """Matrix of m : U (x) H^1(F(-1)) -> H^1(F) and the dimension of its kernel."""
    if M.has_omega:
        raise UnsupportedTerm("needs line middles")
    lc = M.line_complex()
    if lc.hypercohomology(0)[0] != 0:
        raise StabilityViolation("h0(F) is not zero")
    fld = M.field
    nr, r = M.right.mult, M.right.twist
    # representatives of H^1(F(-1)): unit vectors off the pivots of im B at t=-1
    R1, piv1 = _h1_quotient(M, -1)
    dim1 = nr * basis_dim(r - 1)
    reps = [c for c in range(dim1) if c not in set(piv1)]
    R0, piv0 = _h1_quotient(M, 0)
    dim0 = nr * basis_dim(r)
    cols = []
    for u in range(4):
        xu = HomogeneousForm.variable(fld, u)
        mu = multiplication_matrix(xu, r - 1)
        for c in reps:
            q, off = divmod(c, basis_dim(r - 1))
            v = fld.zeros(dim0)
            v[q * basis_dim(r):(q + 1) * basis_dim(r)] = mu[:, off]
            cols.append(_reduce(fld, R0, piv0, v))
    mat = np.array(cols, dtype=fld.dtype).T.reshape(dim0, len(cols)) if cols else fld.zeros((dim0, 0))
    keep = [c for c in range(dim0) if c not in set(piv0)]
    mat = mat[keep]
    kdim = mat.shape[1] - rank_array(fld, mat)
    return mat, kdim


def admissible_quadruples(M):
    """Basis of ker m, each element as four H^1(F(-1)) coordinate vectors."""
    mat, _ = m_map_euler(M)
    fld = M.field
    K = kernel_array(fld, mat) if mat.shape[1] else fld.zeros((0, 0))
    per = mat.shape[1] // 4
    return [[K[u * per:(u + 1) * per, j] for u in range(4)] for j in range(K.shape[1])]


# ---------------------------------------------------------------------------
# stability of extensions by O(-1)


@dataclass
class StabilityReport:
    stable: bool
    h0_E: int
    h0_Edual_minus1: int
    class_nonzero: bool

    @property
    def routes_agree(self):
        return (self.h0_Edual_minus1 == 0) == self.class_nonzero

    def to_json(self):
        return {"stable": self.stable, "h0_E": self.h0_E,
                "h0_Edual_minus1": self.h0_Edual_minus1,
                "class_nonzero": self.class_nonzero, "routes_agree": self.routes_agree}


def split_last(M):
    """The base monad and the row f of an extension built by extension_monad."""
    last = M.middle[-1] if M.middle else None
    if last is None or last.kind != "line" or last.mult != 1:
        raise ShapeError("last middle term must be a single line bundle")
    base = Monad(M.field, M.left, M.middle[:-1], M.right, M.A[:-1],
                 [row[:-1] for row in M.B], None)
    if any(e is not None and not e.is_zero() for e in (row[-1] for row in M.B)):
        raise ShapeError("B must vanish on the extension slot")
    return base, list(M.A[-1]), last.twist


def stability_check(M_E):
    base, f, k = split_last(M_E)
    if k != -1:
        raise ShapeError("stability_check expects an extension by O(-1)")
    h0_E = M_E.line_complex().hypercohomology(0)[0]
    h0_dual = dual_monad(M_E).line_complex().hypercohomology(-1)[0]
    nonzero = not class_of_f(base, -1, f).is_zero()
    return StabilityReport(h0_E == 0 and h0_dual == 0, h0_E, h0_dual, nonzero)


# ---------------------------------------------------------------------------
# towers


@dataclass
class TowerSpec:
    base: Monad
    steps: list  # [(k, [forms over W])]

    def to_json(self):
        return {"base": self.base.to_json(),
                "steps": [{"k": k, "f": [form_to_json(e) for e in f]} for k, f in self.steps]}

    @staticmethod
    def from_json(obj):
        base = Monad.from_json(obj["base"])
        steps = []
        for st in obj["steps"]:
            k = int(st["k"])
            steps.append((k, [form_from_json(base.field, a, k - base.left.twist) for a in st["f"]]))
        return TowerSpec(base, steps)


def build_tower(spec, d_max=None, validate=True):
    stages = [spec.base]
    for i, (k, f) in enumerate(spec.steps):
        M = extension_monad(stages[-1], line(1, k), f)
        if validate:
            rep = validate_monad(M, d_max=d_max)
            if not rep.certified:
                raise StageFailed(i, rep)
        stages.append(M)
    return stages
