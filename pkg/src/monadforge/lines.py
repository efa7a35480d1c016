"""Restriction of monads to lines and splitting types.

On a line L the restricted monad is a complex of sums of O_{P^1}(d).
Sections are computed from its hypercohomology: H^0(E|_L(t)) is
E2^{0,0} plus the part of ker H^1(A_L) killed by the d2 differential
into coker H^0(B_L).  H^1(O(d)) on P^1 is realised by Cech cocycles
s^a t^b with a, b <= -1.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .exact_field import (FieldMismatch, GaussianField, GaussianRational, PrimeField,
                          kernel_array, rank_array)
from .graded import DegenerateLine, LineRestrictor, binary_multiplication_matrix
from .monad import Monad, field_roots

__all__ = [
    "Line", "SplittingType", "DegenerateRestriction", "WindowTooSmall", "InconsistentSplitting",
    "sigma", "real_line", "restrict_monad", "RestrictedComplex", "splitting_type", "scan_lines",
    "check_real_triviality", "lift_to_gaussian",
]


class DegenerateRestriction(ValueError):
    pass


class WindowTooSmall(RuntimeError):
    pass


class InconsistentSplitting(RuntimeError):
    pass


@dataclass(frozen=True)
class Line:
    field: object
    p: tuple
    q: tuple

    def __post_init__(self):
        fld = self.field
        object.__setattr__(self, "p", tuple(fld.coerce(v) for v in self.p))
        object.__setattr__(self, "q", tuple(fld.coerce(v) for v in self.q))
        pq = fld.zeros((2, 4))
        pq[0], pq[1] = self.p, self.q
        if rank_array(fld, pq) < 2:
            raise DegenerateLine("points are projectively equal")

    def contains(self, x):
        m = self.field.zeros((3, 4))
        m[0], m[1], m[2] = self.p, self.q, [self.field.coerce(v) for v in x]
        return rank_array(self.field, m) == 2

    def to_json(self):
        f = self.field.format
        return {"p": [f(v) for v in self.p], "q": [f(v) for v in self.q]}


@dataclass(frozen=True)
class SplittingType:
    degrees: tuple

    def __post_init__(self):
        object.__setattr__(self, "degrees", tuple(sorted(self.degrees, reverse=True)))

    @property
    def rank(self):
        return len(self.degrees)

    @property
    def c1(self):
        return sum(self.degrees)

    def h0(self, t):
        return sum(max(0, a + t + 1) for a in self.degrees)

    def is_trivial(self):
        return all(a == 0 for a in self.degrees)

    def dual(self):
        return SplittingType(tuple(-a for a in self.degrees))

    def __iter__(self):
        return iter(self.degrees)

    def __repr__(self):
        return f"SplittingType{self.degrees}"


def sigma(point):
    """(z1,z2,z3,z4) -> (-conj z2, conj z1, -conj z4, conj z3)."""
    vals = []
    for v in point:
        if hasattr(v, "field"):
            if not isinstance(v.field, GaussianField):
                raise FieldMismatch("sigma needs Gaussian rationals")
            v = v.value
        if not isinstance(v, (GaussianRational, int)):
            raise FieldMismatch("sigma needs Gaussian rationals")
        vals.append(GaussianRational(v) if isinstance(v, int) else v)
    z1, z2, z3, z4 = vals
    return [-z2.conj(), z1.conj(), -z4.conj(), z3.conj()]


def real_line(x):
    return Line(GaussianField(), tuple(x), tuple(sigma(x)))


# ---------------------------------------------------------------------------
# restricted complexes


class RestrictedComplex:
    """left -A-> middle -B-> right on P^1, entries BinaryForms."""

    def __init__(self, field, left, mid, right, A, B):
        self.field = field
        self.left, self.mid, self.right = tuple(left), tuple(mid), tuple(right)
        self.A, self.B = A, B  # A[i][j]: left j -> mid i; B[k][i]: mid i -> right k

    def dual(self):
        At = [[self.B[k][i] for k in range(len(self.right))] for i in range(len(self.mid))]
        Bt = [[self.A[i][j] for i in range(len(self.mid))] for j in range(len(self.left))]
        return RestrictedComplex(self.field, [-a for a in self.right], [-a for a in self.mid],
                                 [-a for a in self.left], At, Bt)

    def _gamma(self, M, src, tgt, t):
        fld = self.field
        rd = [max(b + t + 1, 0) for b in tgt]
        cd = [max(a + t + 1, 0) for a in src]
        out = fld.zeros((sum(rd), sum(cd)))
        r0 = 0
        for i, r in enumerate(rd):
            c0 = 0
            for j, c in enumerate(cd):
                f = M[i][j]
                if r and c and not f.is_zero():
                    out[r0:r0 + r, c0:c0 + c] = binary_multiplication_matrix(f, src[j] + t)
                c0 += c
            r0 += r
        return out

    def gamma_A(self, t):
        return self._gamma(self.A, self.left, self.mid, t)

    def gamma_B(self, t):
        return self._gamma(self.B, self.mid, self.right, t)

    def complex_ok(self):
        for k in range(len(self.right)):
            for j in range(len(self.left)):
                acc = None
                for i in range(len(self.mid)):
                    prod = self.B[k][i] * self.A[i][j]
                    acc = prod if acc is None else acc + prod
                if acc is not None and not acc.is_zero():
                    return False
        return True

    def evaluate(self, M, s, t):
        fld = self.field
        out = fld.zeros((len(M), len(M[0]) if M else 0))
        for i, row in enumerate(M):
            for j, f in enumerate(row):
                out[i, j] = f.evaluate(s, t).value
        return out

    def h0(self, t):
        """h^0 of the restricted bundle twisted by t."""
        fld = self.field
        gA, gB = self.gamma_A(t), self.gamma_B(t)
        if gA.size and rank_array(fld, gA) != gA.shape[1]:
            raise DegenerateRestriction("A_L is not injective on sections")
        kerB = gB.shape[1] - (rank_array(fld, gB) if gB.size else 0)
        e00 = kerB - (rank_array(fld, gA) if gA.size else 0)
        return e00 + self._d2_kernel(t, gB)

    # -- the d2 correction, from ker H^1(A_L) to coker H^0(B_L)
    def _h1_basis(self, twists, t):
        """(component, s-exponent) pairs of the Cech basis of H^1."""
        out = []
        for comp, a in enumerate(twists):
            d = a + t
            for i in range(1, -d):
                out.append((comp, -i))
        return out

    def _laurent_apply(self, M, src_t, vecs, t):
        """Apply a matrix of binary forms to Laurent cochains {comp: {s_exp: coeff}}."""
        fld = self.field
        out = []
        for vec in vecs:
            res = {}
            for comp_in, terms in vec.items():
                for i, row in enumerate(M):
                    f = row[comp_in]
                    if f.is_zero():
                        continue
                    e = f.degree
                    tgt = res.setdefault(i, {})
                    for c, fc in enumerate(f.coeffs):
                        if fc == 0:
                            continue
                        for a, v in terms.items():
                            key = a + e - c
                            tgt[key] = fld.add(tgt.get(key, fld.zero), fld.mul(fc, v))
            out.append(res)
        return out

    def _d2_kernel(self, t, gB):
        fld = self.field
        left_basis = self._h1_basis(self.left, t)
        if not left_basis:
            return 0
        mid_basis = self._h1_basis(self.mid, t)
        mid_index = {b: i for i, b in enumerate(mid_basis)}
        units = [{comp: {a: fld.one}} for comp, a in left_basis]
        images = self._laurent_apply(self.A, self.left, units, t)
        H1A = fld.zeros((len(mid_basis), len(left_basis)))
        for j, img in enumerate(images):
            for comp, terms in img.items():
                deg = self.mid[comp] + t
                for a, v in terms.items():
                    b = deg - a
                    if a <= -1 and b <= -1 and v != 0:
                        H1A[mid_index[(comp, a)], j] = fld.add(H1A[mid_index[(comp, a)], j], v)
        K = kernel_array(fld, H1A) if H1A.shape[0] else fld.identity(len(left_basis))
        if K.shape[1] == 0:
            return 0
        # sigma_t: the part of A.c regular where s != 0 is dropped, keep a >= 0 terms
        cochains = []
        for j in range(K.shape[1]):
            vec = {}
            for idx, (comp, a) in enumerate(left_basis):
                if K[idx, j] != 0:
                    vec.setdefault(comp, {})[a] = K[idx, j]
            cochains.append(vec)
        Ac = self._laurent_apply(self.A, self.left, cochains, t)
        sig_t = []
        for img in Ac:
            part = {}
            for comp, terms in img.items():
                deg = self.mid[comp] + t
                kept = {a: v for a, v in terms.items() if v != 0 and a >= 0 and deg - a < 0}
                if kept:
                    part[comp] = kept
            sig_t.append(part)
        g = self._laurent_apply(self.B, self.mid, sig_t, t)
        rd = [max(b + t + 1, 0) for b in self.right]
        offs = np.concatenate([[0], np.cumsum(rd)]).astype(int)
        G = fld.zeros((sum(rd), len(g)))
        for j, img in enumerate(g):
            for comp, terms in img.items():
                deg = self.right[comp] + t
                for a, v in terms.items():
                    if v == 0:
                        continue
                    if a < 0 or deg - a < 0:
                        raise InconsistentSplitting("d2 image is not a global section")
                    # binary basis index: s^deg .. t^deg, position of s^a is deg - a
                    G[offs[comp] + deg - a, j] = fld.add(G[offs[comp] + deg - a, j], v)
        base = rank_array(fld, gB) if gB.size else 0
        both = rank_array(fld, np.concatenate([gB, G], axis=1)) if G.size else base
        return K.shape[1] - (both - base)


def restrict_monad(M, L, checks=4, seed=0):
    if M.has_omega:
        raise DegenerateRestriction("Omega middles cannot be restricted here")
    M.field.check_same(L.field)
    R = LineRestrictor(M.field, L.p, L.q)
    lA, lB = M.line_A(), M.line_B()
    A = [[R.restrict(f) for f in row] for row in lA.entries]
    B = [[R.restrict(f) for f in row] for row in lB.entries]
    rc = RestrictedComplex(M.field, lA.src, lA.tgt, lB.tgt, A, B)
    rng = np.random.default_rng(seed)
    fld = M.field
    for _ in range(checks):
        s, t = fld.random_array(rng, 2)
        if s == 0 and t == 0:
            continue
        if A and rank_array(fld, rc.evaluate(A, s, t)) < len(lA.src):
            raise DegenerateRestriction("A drops rank on the line")
        if B and rank_array(fld, rc.evaluate(B, s, t)) < len(lB.tgt):
            raise DegenerateRestriction("B drops rank on the line")
    return rc


def splitting_type(M, L, D=4, cap=64, rc=None):
    """Splitting type of the monad bundle on L, from h^0 sequences of E|_L and its dual."""
    rc = rc or restrict_monad(M, L)
    dual = rc.dual()
    r = M.rank
    g = {-1: rc.h0(-1)}
    gd = {}
    while True:
        for t in range(0, D + 1):
            if t not in g:
                g[t] = rc.h0(t)
            if t not in gd:
                gd[t] = dual.h0(t)
        up = g[D] - g[D - 1]  # #{a >= -D}
        down = gd[D] - gd[D - 1]  # #{a <= D}
        if up == r and down == r:
            break
        D *= 2
        if D > cap:
            raise WindowTooSmall(f"splitting type not saturated by twist {cap}")
    mult = Counter()
    ge = {t: g[t] - g[t - 1] for t in range(0, D + 1)}  # #{a >= -t}
    le = {t: gd[t] - gd[t - 1] for t in range(1, D + 1)}  # #{a <= t}
    for t in range(1, D + 1):
        mult[-t] = ge[t] - ge[t - 1]
    for t in range(2, D + 1):
        mult[t] = le[t] - le[t - 1]
    high = sum(a * m for a, m in mult.items() if a >= 2)
    mult[1] = g[-1] - high
    mult[0] = ge[0] - mult[1] - sum(m for a, m in mult.items() if a >= 2)
    if any(m < 0 for m in mult.values()):
        raise InconsistentSplitting(f"negative multiplicity in {dict(mult)}")
    st = SplittingType(tuple(a for a, m in mult.items() for _ in range(m)))
    if st.rank != r or st.c1 != M.c1:
        raise InconsistentSplitting(f"{st} does not match rank {r}, c1 {M.c1}")
    for t, v in g.items():
        if st.h0(t) != v:
            raise InconsistentSplitting(f"{st} predicts h0({t}) = {st.h0(t)}, measured {v}")
    for t, v in gd.items():
        if st.dual().h0(t) != v:
            raise InconsistentSplitting(f"dual of {st} disagrees at twist {t}")
    return st


# ---------------------------------------------------------------------------
# scans


def _random_line(field, rng):
    while True:
        p, q = field.random_array(rng, 4), field.random_array(rng, 4)
        try:
            return Line(field, tuple(p), tuple(q))
        except DegenerateLine:
            continue


def _is_barth(M):
    return (not M.has_omega and M.left.twist == -1 and M.right.twist == 1
            and all(t.twist == 0 for t in M.middle))


def pencil_jumping_lines(M, rng, pencils=4):
    """Lines in random pencils where the d2 matrix B(q)A(p) is singular.

    For a monad O(-1)^n -> O^m -> O(1)^n, h^0(E|_L(-1)) > 0 exactly when
    B(q)A(p) is singular; on a pencil q = q0 + lam q1 the determinant is a
    polynomial of degree <= n in lam, interpolated from n+1 values.
    """
    fld = M.field
    n = M.n
    lA, lB = M.line_A(), M.line_B()
    found = []
    for _ in range(pencils):
        p = list(fld.random_array(rng, 4))
        q0 = fld.random_array(rng, 4)
        q1 = fld.random_array(rng, 4)
        Ap = lA.evaluate(p)
        lams = [fld.coerce(i) for i in range(n + 1)]
        vals = []
        for lam in lams:
            q = fld.normalize(q0 + q1 * lam)
            d = fld.matmul(lB.evaluate(list(q)), Ap)
            vals.append(_det(fld, d))
        for lam in field_roots(fld, _interpolate(fld, lams, vals)):
            q = list(fld.normalize(q0 + q1 * lam))
            try:
                found.append(Line(fld, tuple(p), tuple(q)))
            except DegenerateLine:
                continue
    return found


def _det(field, M):
    """Determinant by exact Gaussian elimination."""
    n = M.shape[0]
    a = np.array(M, dtype=field.dtype, copy=True)
    det = field.one
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r, c] != 0), None)
        if piv is None:
            return field.zero
        if piv != c:
            a[[c, piv]] = a[[piv, c]]
            det = field.neg(det)
        det = field.mul(det, a[c, c])
        inv = field.inv(a[c, c])
        for r in range(c + 1, n):
            if a[r, c] != 0:
                a[r] = field.normalize(a[r] - a[c] * field.mul(a[r, c], inv))
    return det


def _interpolate(field, xs, ys):
    """Coefficients (low first) of the polynomial through the points (Lagrange)."""
    n = len(xs)
    coeffs = [field.zero] * n
    for i in range(n):
        num = [field.one]
        den = field.one
        for j in range(n):
            if j == i:
                continue
            # num *= (x - xs[j])
            nxt = [field.zero] * (len(num) + 1)
            for k, c in enumerate(num):
                nxt[k + 1] = field.add(nxt[k + 1], c)
                nxt[k] = field.add(nxt[k], field.mul(field.neg(xs[j]), c))
            num = nxt
            den = field.mul(den, field.add(xs[i], field.neg(xs[j])))
        scale = field.mul(ys[i], field.inv(den))
        for k, c in enumerate(num):
            coeffs[k] = field.add(coeffs[k], field.mul(c, scale))
    return coeffs


def scan_lines(M, count=200, seed=0, pencils=4):
    rng = np.random.default_rng(seed)
    types = []
    for _ in range(count):
        L = _random_line(M.field, rng)
        types.append((L, splitting_type(M, L), "random"))
    if _is_barth(M) and pencils:
        for L in pencil_jumping_lines(M, rng, pencils):
            types.append((L, splitting_type(M, L), "pencil"))
    counts = Counter(st for _, st, src in types if src == "random")
    generic = max(counts.items(), key=lambda kv: (kv[1], kv[0].degrees))[0] if counts else None
    jumping = [{**L.to_json(), "type": list(st.degrees), "source": src}
               for L, st, src in types if st != generic]
    return {"generic": list(generic.degrees) if generic else [], "jumping": jumping,
            "seed": seed, "lines": count, "pencils": pencils if _is_barth(M) else 0}


def lift_to_gaussian(M):
    """The same monad with coefficients read in Q(i); needs rational or Gaussian input."""
    G = GaussianField()
    if isinstance(M.field, GaussianField):
        return M
    if isinstance(M.field, PrimeField):
        raise FieldMismatch("prime-field monads cannot be lifted to Q(i)")
    obj = M.to_json()
    obj["field"] = G.to_json()
    return Monad.from_json(obj)


def check_real_triviality(M, samples=50, seed=0, bound=5):
    """True if the bundle is trivial on `samples` random real lines; else (False, witness)."""
    M = lift_to_gaussian(M)
    rng = np.random.default_rng(seed)
    checked = []
    for _ in range(samples):
        while True:
            re = rng.integers(-bound, bound + 1, size=4)
            im = rng.integers(-bound, bound + 1, size=4)
            if np.any(re) or np.any(im):
                break
        x = [GaussianRational(int(a), int(b)) for a, b in zip(re, im)]
        L = real_line(x)
        st = splitting_type(M, L)
        checked.append((L, st))
        if not st.is_trivial():
            return False, {"line": L.to_json(), "type": list(st.degrees), "checked": len(checked)}
    return True, {"checked": len(checked)}

