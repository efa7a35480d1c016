"""Monads W O(l) -> V -> R O(r) with line and Omega middles.

The bundle is ker B / im A.  Everything (validation, cohomology, duality,
generation) reduces to exact linear algebra on coefficient vectors.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field

import numpy as np

from .complexes import (ComplexNotExact, DegreeMismatch, FormMatrix, LineComplex, TwistTerm,
                        UnsupportedTerm, block_diag, chi_polynomial, eval_poly, line)
from .exact_field import (DenseMatrix, Field, PrimeField, RationalField,
                          kernel_array, rank_array, row_basis_array, solve_array)
from .graded import (HomogeneousForm, basis_dim, form_from_json, form_to_json,
                     multiplication_matrix, multiply, shift_index, variables)
from .omega import OmegaSection, euler_map, koszul2_map, lift_twists

__all__ = [
    "Monad", "TwistTerm", "CohomologyTable", "ValidationReport", "Verdict",
    "ComplexConditionFailed", "DegreeMismatch", "UnsupportedTerm", "GenerationFailed",
    "NotValidated", "build_barth_monad", "validate_monad", "cohomology", "chi", "dual_monad",
    "gen_null_correlation", "gen_instanton_syzygy", "maximal_minors", "NULL_CORRELATION_J",
]


class ComplexConditionFailed(ValueError):
    def __init__(self, msg, entry=None):
        super().__init__(msg)
        self.entry = entry


class GenerationFailed(RuntimeError):
    def __init__(self, msg, stats):
        super().__init__(f"{msg}: {stats}")
        self.stats = stats


class NotValidated(ValueError):
    pass


_KIND_P = {"omega1": 1, "omega2": 2}


class Monad:
    """left -A-> middle -B-> right.

    A has one row per middle slot (a term of multiplicity m gives m slots);
    line slots hold HomogeneousForms, Omega slots hold OmegaSections.
    B has one row per right slot; its entries in Omega columns are None
    (those maps are always zero here).
    """

    def __init__(self, field, left, middle, right, A, B, J=None, check=True):
        self.field = field
        self.left = left
        self.middle = tuple(middle)
        self.right = right
        if left.kind != "line" or right.kind != "line":
            raise UnsupportedTerm("outer terms must be sums of line bundles")
        slots = []
        for term in self.middle:
            slots.extend([(term.kind, term.twist)] * term.mult)
        self.slots = tuple(slots)
        n, nr = left.mult, right.mult
        if len(A) != len(slots) or any(len(row) != n for row in A):
            raise DegreeMismatch(f"A must be {len(slots)}x{n}")
        if len(B) != nr or any(len(row) != len(slots) for row in B):
            raise DegreeMismatch(f"B must be {nr}x{len(slots)}")
        arows = []
        for (kind, tw), row in zip(slots, A):
            d = tw - left.twist
            out = []
            for e in row:
                if kind == "line":
                    if e is None:
                        e = HomogeneousForm.zero(field, d)
                    if not isinstance(e, HomogeneousForm):
                        raise DegreeMismatch("line slots need forms in A")
                    if e.degree != d:
                        if not e.is_zero():
                            raise DegreeMismatch(f"A entry of degree {e.degree}, expected {d}")
                        e = HomogeneousForm.zero(field, d)
                else:
                    p = _KIND_P[kind]
                    if e is None:
                        e = OmegaSection.zero(field, p, d)
                    if not isinstance(e, OmegaSection) or e.p != p or e.degree != d:
                        raise DegreeMismatch(f"slot Omega^{p}({tw}) needs sections of degree {d}")
                field.check_same(e.field)
                out.append(e)
            arows.append(tuple(out))
        self.A = tuple(arows)
        brows = []
        for row in B:
            out = []
            for (kind, tw), e in zip(slots, row):
                if kind != "line":
                    if e is not None and not (isinstance(e, HomogeneousForm) and e.is_zero()):
                        raise UnsupportedTerm("B must vanish on Omega slots")
                    out.append(None)
                    continue
                d = right.twist - tw
                if e is None:
                    e = HomogeneousForm.zero(field, d)
                field.check_same(e.field)
                if e.degree != d:
                    if not e.is_zero():
                        raise DegreeMismatch(f"B entry of degree {e.degree}, expected {d}")
                    e = HomogeneousForm.zero(field, d)
                out.append(e)
            brows.append(tuple(out))
        self.B = tuple(brows)
        self.J = J
        if J is not None:
            _check_symplectic(J, len(slots))
        if check:
            self.check_complex()

    # -- bookkeeping
    @property
    def n(self):
        return self.left.mult

    @property
    def middle_dim(self):
        return len(self.slots)

    @property
    def rank(self):
        return sum(t.rank for t in self.middle) - self.left.rank - self.right.rank

    @property
    def c1(self):
        return sum(t.c1 for t in self.middle) - self.left.c1 - self.right.c1

    @property
    def has_omega(self):
        return any(t.kind != "line" for t in self.middle)

    def line_slots(self):
        return [i for i, (k, _) in enumerate(self.slots) if k == "line"]

    def line_A(self):
        """A restricted to the line slots, as a FormMatrix."""
        idx = self.line_slots()
        return FormMatrix(self.field, [self.left.twist] * self.n,
                          [self.slots[i][1] for i in idx], [self.A[i] for i in idx])

    def line_B(self):
        idx = self.line_slots()
        return FormMatrix(self.field, [self.slots[i][1] for i in idx],
                          [self.right.twist] * self.right.mult,
                          [[row[i] for i in idx] for row in self.B])

    def check_complex(self):
        prod = self.line_B().compose(self.line_A())
        for i, row in enumerate(prod.entries):
            for j, f in enumerate(row):
                if not f.is_zero():
                    raise ComplexConditionFailed(f"(B.A)[{i}][{j}] = {f!r} is not zero", f)

    # -- the expanded line-sum complex
    def line_complex(self):
        """The complex with every Omega term replaced by its Koszul resolution."""
        field = self.field
        lt = [self.left.twist] * self.n
        deg0, A_rows = [], []
        for i, (kind, tw) in enumerate(self.slots):
            if kind == "line":
                deg0.append(tw)
                A_rows.append(self.A[i])
        first, second = [self.line_B()], [FormMatrix(field, [self.right.twist] * self.right.mult, [])]
        for i, (kind, tw) in enumerate(self.slots):
            if kind == "line":
                continue
            p = _KIND_P[kind]
            lift = lift_twists(p, tw)
            deg0.extend(lift)
            for r in range(len(lift)):
                A_rows.append(tuple(s.data[r] for s in self.A[i]))
            if p == 1:
                first.append(euler_map(field, tw))
                second.append(FormMatrix(field, [tw], []))
            else:
                first.append(koszul2_map(field, tw))
                second.append(euler_map(field, tw))
        maps = [FormMatrix(field, lt, deg0, A_rows), block_diag(field, first)]
        d1 = block_diag(field, second)
        if d1.tgt:
            maps.append(d1)
        terms = [lt, deg0, list(maps[1].tgt)] + ([list(d1.tgt)] if d1.tgt else [])
        return LineComplex(field, tuple(tuple(t) for t in terms), tuple(maps), start=-1)

    def expanded_A(self):
        return self.line_complex().maps[0]

    # -- json
    def to_json(self):
        def entry(e):
            if isinstance(e, OmegaSection):
                return e.to_json()
            return form_to_json(e)
        out = {
            "field": self.field.to_json(),
            "left": self.left.to_json(),
            "middle": [t.to_json() for t in self.middle],
            "right": self.right.to_json(),
            "A": [[entry(e) for e in row] for row in self.A],
            "B": [[None if e is None else form_to_json(e) for e in row] for row in self.B],
        }
        if self.J is not None:
            out["J"] = [[self.field.format(v) for v in row] for row in self.J.data]
        return out

    @staticmethod
    def from_json(obj):
        fld = Field.from_json(obj["field"])
        left = TwistTerm.from_json(obj["left"])
        right = TwistTerm.from_json(obj["right"])
        middle = [TwistTerm.from_json(t) for t in obj["middle"]]
        slots = [(t.kind, t.twist) for t in middle for _ in range(t.mult)]
        A = []
        for (kind, tw), row in zip(slots, obj["A"]):
            if kind == "line":
                A.append([form_from_json(fld, e, tw - left.twist) for e in row])
            else:
                A.append([OmegaSection.from_json(fld, e) for e in row])
        if len(obj["A"]) != len(slots):
            raise DegreeMismatch("A has the wrong number of rows")
        B = []
        for row in obj["B"]:
            B.append([None if e is None else form_from_json(fld, e, right.twist - tw)
                      for (kind, tw), e in zip(slots, row)])
        J = None
        if obj.get("J") is not None:
            J = DenseMatrix(fld, fld.array([fld.parse(str(v)) for r in obj["J"] for v in r],
                                           shape=(len(obj["J"]), len(obj["J"]))))
        return Monad(fld, left, middle, right, A, B, J)

    def __eq__(self, other):
        if not isinstance(other, Monad):
            return NotImplemented
        return self.to_json() == other.to_json()

    def __hash__(self):
        return hash((self.left, self.middle, self.right, self.A))

    def __repr__(self):
        mid = " + ".join(f"{t.kind}({t.twist})^{t.mult}" for t in self.middle)
        return f"Monad(O({self.left.twist})^{self.n} -> {mid} -> O({self.right.twist})^{self.right.mult})"


def _check_symplectic(J, m):
    if J.shape != (m, m):
        raise DegreeMismatch(f"J must be {m}x{m}")
    if J.transpose() != -J:
        raise ValueError("J is not antisymmetric")
    if J.rank() != m:
        raise ValueError("J is singular")


# ---------------------------------------------------------------------------
# construction


def _lin_comb(field, forms, coeffs, degree):
    acc = HomogeneousForm.zero(field, degree)
    for f, c in zip(forms, coeffs):
        if c != 0 and not f.is_zero():
            acc = acc + f.scale(c)
    return acc


def transpose_times_J(field, A_rows, J, right_twist, slot_twists):
    """B = A^t J as a list of rows over the middle slots."""
    n = len(A_rows[0]) if A_rows else 0
    m = len(A_rows)
    B = []
    for l in range(n):
        row = []
        for i in range(m):
            d = right_twist - slot_twists[i]
            acc = HomogeneousForm.zero(field, d)
            for j in range(m):
                c = J.data[j, i]
                if c == 0 or A_rows[j][l].is_zero():
                    continue
                f = A_rows[j][l]
                if f.degree != d:
                    raise DegreeMismatch("J pairs middle terms of incompatible twists")
                acc = acc + f.scale(c)
            row.append(acc)
        B.append(row)
    return B


def build_barth_monad(A, J=None, B=None, middle_twists=None, left_twist=-1):
    """Monad O(left)^n -> sum O(a_i) -> O(-left)^n from A and either J or B.

    A may be a FormMatrix or a list of rows of forms.
    """
    if isinstance(A, FormMatrix):
        fld = A.field
        rows = [list(r) for r in A.entries]
        middle_twists = list(A.tgt) if middle_twists is None else middle_twists
        left_twist = A.src[0] if A.src else left_twist
    else:
        rows = [list(r) for r in A]
        fld = next(f.field for r in rows for f in r)
    m = len(rows)
    n = len(rows[0]) if rows else 0
    if middle_twists is None:
        middle_twists = [0] * m
    for i, row in enumerate(rows):
        for f in row:
            if not f.is_zero() and f.degree != middle_twists[i] - left_twist:
                raise DegreeMismatch(f"A row {i} has entries of degree {f.degree}")
    right_twist = -left_twist
    if (J is None) == (B is None):
        raise ValueError("give exactly one of J or B")
    if J is not None:
        if not isinstance(J, DenseMatrix):
            J = DenseMatrix(fld, fld.array([v for r in J for v in r], shape=(m, m)))
        _check_symplectic(J, m)
        B = transpose_times_J(fld, rows, J, right_twist, middle_twists)
    middle = _collapse_terms(middle_twists)
    return Monad(fld, line(n, left_twist), middle, line(n, right_twist), rows, B, J)


def _collapse_terms(twists):
    """Group consecutive equal twists into TwistTerms (slot order is preserved)."""
    out = []
    for tw in twists:
        if out and out[-1].twist == tw:
            out[-1] = line(out[-1].mult + 1, tw)
        else:
            out.append(line(1, tw))
    return out


NULL_CORRELATION_J = ((0, 1, 0, 0), (-1, 0, 0, 0), (0, 0, 0, 1), (0, 0, -1, 0))


def gen_null_correlation(field=None):
    """Charge one: A = (x0,x1,x2,x3)^t, B = (-x1, x0, -x3, x2)."""
    field = field or PrimeField()
    xs = variables(field)
    J = DenseMatrix(field, field.array([v for r in NULL_CORRELATION_J for v in r], shape=(4, 4)))
    return build_barth_monad([[x] for x in xs], J=J)


# ---------------------------------------------------------------------------
# validation


@dataclass
class Verdict:
    status: str  # certified | refuted | inconclusive
    degree: int | None = None
    witness: list | None = None

    def to_json(self, field):
        out = {"status": self.status, "degree": self.degree}
        if self.witness is not None:
            out["witness"] = [field.format(v) for v in self.witness]
        return out


@dataclass
class ValidationReport:
    degree_ok: bool
    complex_ok: bool
    A_injective: Verdict
    B_surjective: Verdict
    saturation_degree_used: int
    d_max: int
    field: object = dc_field(repr=False, default=None)

    @property
    def certified(self):
        return (self.degree_ok and self.complex_ok and self.A_injective.status == "certified"
                and self.B_surjective.status == "certified")

    @property
    def refuted(self):
        return (not self.complex_ok or self.A_injective.status == "refuted"
                or self.B_surjective.status == "refuted")

    def to_json(self):
        return {"degree_ok": self.degree_ok, "complex_ok": self.complex_ok,
                "A_injective": self.A_injective.to_json(self.field),
                "B_surjective": self.B_surjective.to_json(self.field),
                "saturation_degree_used": self.saturation_degree_used,
                "d_max": self.d_max, "certified": self.certified}


def determinant(field, M):
    """Determinant of a square grid of forms by Laplace expansion; None when it vanishes."""
    k = len(M)
    if k == 0:
        return HomogeneousForm.constant(field, field.one)
    if k == 1:
        return None if M[0][0].is_zero() else M[0][0]
    acc = None
    for j in range(k):
        if M[0][j].is_zero():
            continue
        minor = determinant(field, [row[:j] + row[j + 1:] for row in M[1:]])
        if minor is None:
            continue
        term = multiply(M[0][j], minor)
        if j % 2:
            term = -term
        acc = term if acc is None else acc + term
    if acc is None or acc.is_zero():
        return None
    return acc


def maximal_minors(fm):
    """All maximal minors of a FormMatrix, grouped by degree."""
    field = fm.field
    rows, cols = fm.shape
    r = min(rows, cols)
    out = {}
    ent = [list(row) for row in fm.entries]
    if rows >= cols:
        choices = [(s, range(cols)) for s in itertools.combinations(range(rows), r)]
    else:
        choices = [(range(rows), s) for s in itertools.combinations(range(cols), r)]
    for rs, cs in choices:
        sub = [[ent[i][j] for j in cs] for i in rs]
        d = sum(fm.tgt[i] for i in rs) - sum(fm.src[j] for j in cs)
        det = determinant(field, sub)
        if det is None:
            continue
        if det.degree != d:
            raise DegreeMismatch("inhomogeneous minor")
        out.setdefault(d, []).append(det.coeffs)
    return out


def _ideal_pieces(field, gens, d_max):
    """Yield (d, basis rows of I_d) for d from the lowest generator degree to d_max."""
    if not gens:
        return
    d0 = min(gens)
    basis = field.zeros((0, basis_dim(d0)))
    for d in range(d0, d_max + 1):
        parts = []
        if d > d0 and basis.shape[0]:
            for i in range(4):
                e = tuple(1 if k == i else 0 for k in range(4))
                sh = field.zeros((basis.shape[0], basis_dim(d)))
                sh[:, shift_index(d - 1, e)] = basis
                parts.append(sh)
        if d in gens:
            parts.append(np.array(gens[d], dtype=field.dtype).reshape(len(gens[d]), -1))
        if parts:
            basis = row_basis_array(field, np.concatenate(parts, axis=0))
        else:
            basis = field.zeros((0, basis_dim(d)))
        yield d, basis


def _rank_drops(fm, pt, r):
    return rank_array(fm.field, fm.evaluate(pt)) < r


def _sample_point(field, rng):
    return list(field.random_array(rng, 4))


def _check_fiber_rank(fm, d_max, sample_points, rng):
    field = fm.field
    r = min(fm.shape)
    full = fm.shape[0] if fm.shape[0] <= fm.shape[1] else fm.shape[1]
    if r == 0:
        return Verdict("certified", 0), 0
    for _ in range(sample_points):
        pt = _sample_point(field, rng)
        if not any(v != 0 for v in pt):
            continue
        if _rank_drops(fm, pt, full):
            return Verdict("refuted", None, normalize_point(field, pt)), 0
    gens = maximal_minors(fm)
    if not gens:
        return Verdict("refuted", None, _sample_point(field, rng)), 0
    check = lambda p: _rank_drops(fm, p, full)  # noqa: E731
    hf, last = {}, 0
    for d, basis in _ideal_pieces(field, gens, d_max):
        last = d
        hf[d] = basis_dim(d) - basis.shape[0]
        if hf[d] == 0:
            return Verdict("certified", d), d
        if hf.get(d - 1) == hf[d]:
            wit = _try_extract(field, gens, basis, d, hf[d], rng, check)
            if wit is not None:
                return Verdict("refuted", None, wit), last
    wit = find_common_zero(field, gens, d_max, rng, check=check, first_slice=1)
    if wit is not None:
        return Verdict("refuted", None, wit), last
    return Verdict("inconclusive", d_max), last


def default_dmax(M):
    return 4 * max(M.n, M.right.mult) + 4


def validate_monad(M, d_max=None, sample_points=16, seed=0):
    rng = np.random.default_rng(seed)
    d_max = default_dmax(M) if d_max is None else d_max
    try:
        M.check_complex()
        lc = M.line_complex()
        complex_ok = lc.check_complex()
    except ComplexConditionFailed:
        complex_ok = False
        lc = None
    A_fm = lc.maps[0] if lc is not None else M.expanded_A()
    a_ver, a_deg = _check_fiber_rank(A_fm, d_max, sample_points, rng)
    b_ver, b_deg = _check_fiber_rank(M.line_B(), d_max, sample_points, rng)
    if M.right.mult > len(M.line_slots()):
        b_ver = Verdict("refuted", None, _sample_point(M.field, rng))
    return ValidationReport(True, complex_ok, a_ver, b_ver, max(a_deg, b_deg), d_max, M.field)


# ---------------------------------------------------------------------------
# common zeros of an ideal through its annihilator (used for witnesses)


def find_common_zero(field, gens, d_max, rng, check=None, max_slices=3, first_slice=0):
    """Try to exhibit a rational common zero of the forms in gens.

    Uses the dual space of I_d once the Hilbert function of S/I is stable:
    multiplication operators on it have the coordinates of the zeros as
    eigenvalues.  Positive-dimensional loci are cut down by random
    hyperplanes first.  Returns a verified point or None.
    """
    for slices in range(first_slice, max_slices + 1):
        g = {d: list(v) for d, v in gens.items()}
        for _ in range(slices):
            g.setdefault(1, []).append(field.random_array(rng, 4))
        hf = {}
        for d, basis in _ideal_pieces(field, g, d_max):
            hf[d] = basis_dim(d) - basis.shape[0]
            if hf[d] == 0:
                return None  # the slices missed the locus
            if hf.get(d - 1) == hf[d]:
                pt = _try_extract(field, gens, basis, d, hf[d], rng, check)
                if pt is not None:
                    return pt
    return None


def _try_extract(field, gens, basis, d, N, rng, check):
    for pt in _points_from_dual(field, basis, d, N, rng):
        if _vanishes(field, gens, pt) and (check is None or check(pt)):
            return normalize_point(field, pt)
    return None


def normalize_point(field, pt):
    """Scale so that the first nonzero coordinate is 1."""
    lead = next(v for v in pt if v != 0)
    inv = field.inv(lead)
    return [field.mul(v, inv) for v in pt]


def _vanishes(field, gens, pt):
    from .graded import evaluate_raw
    for d, vecs in gens.items():
        for v in vecs:
            if evaluate_raw(HomogeneousForm(field, d, v), pt) != 0:
                return False
    return True


def _points_from_dual(field, basis, d, N, rng):
    K = kernel_array(field, basis) if basis.shape[0] else field.identity(basis_dim(d))
    L = K.T  # N functionals on S_d
    if L.shape[0] != N:
        return []
    l0 = HomogeneousForm(field, 1, field.random_array(rng, 4))
    H0 = field.matmul(L, multiplication_matrix(l0, d - 1))
    piv = _pivot_columns(field, H0)
    if len(piv) < N:
        return []
    H0s = H0[:, piv]
    inv = _inverse(field, H0s)
    Ms = []
    for i in range(4):
        Hi = field.matmul(L, multiplication_matrix(HomogeneousForm.variable(field, i), d - 1))
        Ms.append(field.matmul(Hi[:, piv], inv))
    c = field.random_array(rng, 4)
    Mc = field.zeros((N, N))
    for ci, Mi in zip(c, Ms):
        Mc = field.normalize(Mc + Mi * ci)
    pts = []
    for mu in _eigenvalues(field, Mc):
        E = kernel_array(field, field.normalize(Mc - field.identity(N) * mu))
        k = E.shape[1]
        if k == 0:
            continue
        coords = []
        for Mi in Ms:
            ME = field.matmul(Mi, E)
            # restriction of Mi to the eigenspace, via exact solves
            tr = field.zero
            for j in range(k):
                sol = solve_array(field, E, ME[:, j])
                if sol is None:
                    break
                tr = field.add(tr, sol[j])
            else:
                coords.append(field.mul(tr, field.inv(field.coerce(k))))
                continue
            break
        if len(coords) == 4:
            pts.append(coords)
    return pts


def _pivot_columns(field, M):
    from .exact_field import rref_array
    return rref_array(field, M)[1]


def _inverse(field, M):
    n = M.shape[0]
    from .exact_field import rref_array
    R, piv = rref_array(field, np.concatenate([M, field.identity(n)], axis=1))
    return R[:, n:]


def charpoly(field, M):
    """Coefficients c_0..c_N of det(mu I - M) (Faddeev-LeVerrier)."""
    N = M.shape[0]
    c = [field.zero] * (N + 1)
    c[N] = field.one
    Mk = field.zeros((N, N))
    I = field.identity(N)
    for k in range(1, N + 1):
        Mk = field.normalize(field.matmul(M, Mk) + I * c[N - k + 1])
        AM = field.matmul(M, Mk)
        tr = field.zero
        for i in range(N):
            tr = field.add(tr, AM[i, i])
        c[N - k] = field.mul(field.neg(tr), field.inv(field.coerce(k)))
    return c


def _eigenvalues(field, M):
    return field_roots(field, charpoly(field, M))


def field_roots(field, c):
    """Distinct roots lying in the field of sum c_k x^k (c_0 first)."""
    while len(c) > 1 and c[-1] == 0:
        c = c[:-1]
    if len(c) <= 1:
        return []
    if isinstance(field, PrimeField):
        p = field.p
        mu = np.arange(p, dtype=np.int64)
        val = np.zeros(p, dtype=np.int64)
        for coef in reversed(c):
            val = (val * mu + int(coef)) % p
        return [int(m) for m in np.flatnonzero(val == 0)]
    import sympy
    x = sympy.Symbol("x")
    if isinstance(field, RationalField):
        poly = sympy.Poly([sympy.Rational(v.numerator, v.denominator) for v in reversed(c)], x)
        return [field.coerce(f"{sympy.Rational(r)}") for r in poly.ground_roots()]
    gs = [field.coerce(v) for v in reversed(c)]
    poly = sympy.Poly([sympy.Rational(v.re.numerator, v.re.denominator)
                       + sympy.I * sympy.Rational(v.im.numerator, v.im.denominator)
                       for v in gs], x, extension=sympy.I)
    out = []
    for r in sympy.roots(poly):
        re, im = sympy.re(r), sympy.im(r)
        if re.is_Rational and im.is_Rational:
            out.append(field.coerce(f"{re}+{im}*i"))
    return out


# ---------------------------------------------------------------------------
# cohomology


@dataclass
class CohomologyTable:
    rank: int
    c1: int
    entries: dict
    chi_coeffs: tuple

    def h(self, i, t):
        return self.entries[(i, t)]

    @property
    def twists(self):
        return sorted({t for _, t in self.entries})

    def row(self, t):
        return tuple(self.entries[(i, t)] for i in range(4))

    def chi(self, t):
        v = eval_poly(self.chi_coeffs, t)
        return int(v)

    def euler_ok(self):
        return all(sum((-1) ** i * self.entries[(i, t)] for i in range(4)) == self.chi(t)
                   for t in self.twists)

    def same_values(self, other):
        return self.entries == other.entries

    def to_json(self):
        return {"rank": self.rank, "c1": self.c1,
                "chi": [f"{c.numerator}/{c.denominator}" for c in self.chi_coeffs],
                "table": {str(t): list(self.row(t)) for t in self.twists}}

    def format(self):
        lines = [f"rank {self.rank}  c1 {self.c1}",
                 f"{'t':>4} {'h0':>6} {'h1':>6} {'h2':>6} {'h3':>6} {'chi':>7}"]
        for t in self.twists:
            h = self.row(t)
            lines.append(f"{t:>4} " + " ".join(f"{v:>6}" for v in h) + f" {self.chi(t):>7}")
        return "\n".join(lines)


def chi(M, t):
    return (sum(term.chi(t) for term in M.middle)
            - M.left.chi(t) - M.right.chi(t))


def table_of_complex(M, t_min, t_max):
    lc = M.line_complex()
    entries = {}
    for t in range(t_min, t_max + 1):
        h = lc.hypercohomology(t)
        for i in range(4):
            entries[(i, t)] = h[i]
    return CohomologyTable(M.rank, M.c1, entries, chi_polynomial(lambda t: chi(M, t)))


def cohomology(M, t_min, t_max, force=False, report=None, d_max=None):
    if M.has_omega:
        raise UnsupportedTerm("Omega middles go through cohomology_ext")
    if not force:
        report = report or validate_monad(M, d_max=d_max)
        if not report.certified:
            raise NotValidated(f"monad not certified: {report.to_json()}")
    return table_of_complex(M, t_min, t_max)


def dual_monad(M):
    if M.has_omega:
        raise UnsupportedTerm("dual_monad needs line middles")
    left = M.right.dual()
    right = M.left.dual()
    middle = [t.dual() for t in M.middle]
    A = [[M.B[l][i] for l in range(M.right.mult)] for i in range(M.middle_dim)]
    B = [[M.A[i][j] for i in range(M.middle_dim)] for j in range(M.n)]
    J = None
    if M.J is not None:
        J = DenseMatrix(M.field, _inverse(M.field, M.J.data))
    return Monad(M.field, left, middle, right, A, B, J)


# ---------------------------------------------------------------------------
# instanton generation


def _random_linear_matrix(field, rows, cols, rng):
    return [[HomogeneousForm.random(field, 1, rng) for _ in range(cols)] for _ in range(rows)]


def _hooft_seed(field, n, rng):
    """A structured n x (2n+2) matrix of linear forms with n independent syzygies."""
    xs = variables(field)

    def M(s, t):
        out = [[None] * n for _ in range(n + 1)]
        for i in range(n):
            out[i][i] = s
            out[i + 1][i] = t
        return out
    while True:
        h = field.random_array(rng, 2 * n + 1)
        Q = field.zeros((n + 1, n + 1))
        for a in range(n + 1):
            for b in range(n + 1):
                Q[a, b] = h[a + b]
        if rank_array(field, Q) == n + 1:
            break
    # B = [M(x2,x3)^t Q, -M(x0,x1)^t Q]
    B = []
    m1, m2 = M(xs[0], xs[1]), M(xs[2], xs[3])
    for i in range(n):
        row = []
        for blk, sign in ((m2, 1), (m1, -1)):
            for c in range(n + 1):
                acc = HomogeneousForm.zero(field, 1)
                for k in range(n + 1):
                    if blk[k][i] is not None and Q[k, c] != 0:
                        acc = acc + blk[k][i].scale(Q[k, c])
                row.append(acc if sign > 0 else -acc)
        B.append(row)
    return B


def _randomize(field, B, rng):
    """Random coordinate change and random row/column basis changes."""
    n, m = len(B), len(B[0])
    while True:
        g = field.random_array(rng, (4, 4))
        P = field.random_array(rng, (m, m))
        R = field.random_array(rng, (n, n))
        if (rank_array(field, g) == 4 and rank_array(field, P) == m
                and rank_array(field, R) == n):
            break
    gT = g.T

    def sub(f):
        return HomogeneousForm(field, 1, field.matmul(gT, f.coeffs.reshape(4, 1)).ravel())
    Bs = [[sub(f) for f in row] for row in B]
    # R * Bs * P
    tmp = [[_lin_comb(field, [Bs[i][k] for k in range(m)], P[:, j], 1) for j in range(m)]
           for i in range(n)]
    return [[_lin_comb(field, [tmp[k][j] for k in range(n)], R[i, :], 1) for j in range(m)]
            for i in range(n)]


def linear_syzygies(field, B):
    """Basis of columns c of linear forms with B c = 0, as a (4m x s) raw array."""
    n, m = len(B), len(B[0])
    rows = field.zeros((n * 10, 4 * m))
    for i in range(n):
        for j in range(m):
            rows[10 * i:10 * i + 10, 4 * j:4 * j + 4] = multiplication_matrix(B[i][j], 1)
    return kernel_array(field, rows)


def _solve_symplectic(field, A, B, rng):
    """Find antisymmetric invertible J and invertible X with A^t J = X B, or None."""
    m, n = len(A), len(A[0])
    pairs = [(a, b) for a in range(m) for b in range(a + 1, m)]
    nj, nx = len(pairs), n * n
    # unknowns: J_ab (a<b), X_lk; equations per (l, i, coefficient)
    eqs = field.zeros((n * m * 4, nj + nx))
    r = 0
    for l in range(n):
        for i in range(m):
            for c in range(4):
                # (A^t J)_{l,i} = sum_j A_{j,l} J_{j,i}
                for u, (a, b) in enumerate(pairs):
                    if b == i:
                        eqs[r, u] = field.add(eqs[r, u], A[a][l].coeffs[c])
                    if a == i:
                        eqs[r, u] = field.add(eqs[r, u], field.neg(A[b][l].coeffs[c]))
                for k in range(n):
                    eqs[r, nj + l * n + k] = field.neg(B[k][i].coeffs[c])
                r += 1
    K = kernel_array(field, eqs)
    if K.shape[1] == 0:
        return None
    for _ in range(8):
        v = field.matmul(K, field.random_array(rng, (K.shape[1], 1))).ravel()
        J = field.zeros((m, m))
        for u, (a, b) in enumerate(pairs):
            J[a, b] = v[u]
            J[b, a] = field.neg(v[u])
        X = v[nj:].reshape(n, n)
        if rank_array(field, J) == m and rank_array(field, X) == n:
            return DenseMatrix(field, J)
    return None


def gen_instanton_syzygy(n, seed=0, field=None, max_retries=40, d_max=None):
    """A validated charge-n instanton monad over F_p from the syzygies of a random B."""
    if n < 1:
        raise ValueError("n must be at least 1")
    field = field or PrimeField()
    rng = np.random.default_rng(seed)
    m = 2 * n + 2
    stats = {"attempts": 0, "few_syzygies": 0, "no_symplectic": 0, "not_certified": 0,
             "bad_cohomology": 0}
    for _ in range(max_retries):
        stats["attempts"] += 1
        if n <= 2:
            B0 = _random_linear_matrix(field, n, m, rng)
        else:
            B0 = _randomize(field, _hooft_seed(field, n, rng), rng)
        K = linear_syzygies(field, B0)
        if K.shape[1] < n:
            stats["few_syzygies"] += 1
            continue
        coef = field.matmul(K, field.random_array(rng, (K.shape[1], n)))
        A = [[HomogeneousForm(field, 1, coef[4 * i:4 * i + 4, l]) for l in range(n)]
             for i in range(m)]
        J = _solve_symplectic(field, A, B0, rng)
        if J is None:
            stats["no_symplectic"] += 1
            continue
        try:
            M = build_barth_monad(A, J=J)
        except (ComplexConditionFailed, ValueError):
            stats["no_symplectic"] += 1
            continue
        rep = validate_monad(M, d_max=d_max, seed=int(rng.integers(2 ** 31)))
        if not rep.certified:
            stats["not_certified"] += 1
            continue
        lc = M.line_complex()
        try:
            h_m2, h_m1, h_0 = lc.hypercohomology(-2), lc.hypercohomology(-1), lc.hypercohomology(0)
        except ComplexNotExact:
            stats["bad_cohomology"] += 1
            continue
        if h_m2[1] != 0 or h_0[0] != 0 or h_m1[1] != n:
            stats["bad_cohomology"] += 1
            continue
        return M
    raise GenerationFailed(f"no charge-{n} instanton after {max_retries} attempts", stats)

