"""Complexes of sums of line bundles on P^3 and their hypercohomology.

A line-sum term O(a) has H^0 = S_a and H^3 = (S_{-a-4})^*, nothing else.
For a complex C^p of such terms that is quasi-isomorphic to a single sheaf
E placed in degree 0, the hypercohomology spectral sequence has only the
rows q = 0 and q = 3; as long as the complex spans at most four degrees no
differential can join the rows, so

    h^i(E(t)) = H^i(Gamma row) + H^(i-3)(H^3 row).

Every map here is an explicit multiplication matrix (H^3 maps are the
transposes, pairing = coefficient extraction).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb


from .exact_field import rank_array
from .graded import HomogeneousForm, basis_dim, evaluate_raw, multiplication_matrix, multiply


class DegreeMismatch(ValueError):
    pass


class UnsupportedTerm(ValueError):
    pass


class ComplexNotExact(ValueError):
    """The complex has hypercohomology in degrees no sheaf can produce."""


KINDS = ("line", "omega1", "omega2")


@dataclass(frozen=True)
class TwistTerm:
    kind: str
    mult: int
    twist: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown term kind {self.kind!r}")
        if self.mult < 0:
            raise ValueError("multiplicity must be non-negative")

    @property
    def rank(self):
        return self.mult * (1 if self.kind == "line" else 3)

    @property
    def c1(self):
        k = self.twist
        per = {"line": k, "omega1": 3 * k - 4, "omega2": 3 * k - 8}[self.kind]
        return self.mult * per

    def chi(self, t):
        s = self.twist + t
        if self.kind == "line":
            one = chi_line(s)
        elif self.kind == "omega1":
            one = 4 * chi_line(s - 1) - chi_line(s)
        else:
            one = 6 * chi_line(s - 2) - 4 * chi_line(s - 1) + chi_line(s)
        return self.mult * one

    def dual(self):
        if self.kind != "line":
            raise UnsupportedTerm("only line terms dualize here")
        return TwistTerm("line", self.mult, -self.twist)

    def to_json(self):
        return {"kind": self.kind, "mult": self.mult, "twist": self.twist}

    @staticmethod
    def from_json(obj):
        return TwistTerm(obj["kind"], int(obj["mult"]), int(obj["twist"]))


def line(mult, twist):
    return TwistTerm("line", mult, twist)


def chi_line(s):
    """chi(O(s)) on P^3, valid for every integer s."""
    return (s + 1) * (s + 2) * (s + 3) // 6


def h0_line(s):
    return comb(s + 3, 3) if s >= 0 else 0


def h3_line(s):
    return h0_line(-s - 4)


class FormMatrix:
    """A map between sums of line bundles: entries[i][j] : O(src[j]) -> O(tgt[i])."""

    __slots__ = ("field", "src", "tgt", "entries")

    def __init__(self, field, src, tgt, entries=None):
        self.field = field
        self.src = tuple(int(a) for a in src)
        self.tgt = tuple(int(b) for b in tgt)
        if entries is None:
            entries = [[None] * len(self.src) for _ in self.tgt]
        if len(entries) != len(self.tgt) or any(len(r) != len(self.src) for r in entries):
            raise DegreeMismatch(
                f"entry grid does not match {len(self.tgt)}x{len(self.src)}")
        rows = []
        for i, row in enumerate(entries):
            out = []
            for j, f in enumerate(row):
                d = self.tgt[i] - self.src[j]
                if f is None:
                    f = HomogeneousForm.zero(field, d)
                else:
                    field.check_same(f.field)
                    if f.degree != d:
                        if f.is_zero():
                            f = HomogeneousForm.zero(field, d)
                        else:
                            raise DegreeMismatch(
                                f"entry ({i},{j}) has degree {f.degree}, expected {d}")
                out.append(f)
            rows.append(tuple(out))
        self.entries = tuple(rows)

    @property
    def shape(self):
        return len(self.tgt), len(self.src)

    def is_zero(self):
        return all(f.is_zero() for row in self.entries for f in row)

    def compose(self, other):
        """self o other, where other: X -> src(self)."""
        if other.tgt != self.src:
            raise DegreeMismatch("cannot compose: intermediate twists differ")
        self.field.check_same(other.field)
        out = []
        for i in range(len(self.tgt)):
            row = []
            for k in range(len(other.src)):
                acc = HomogeneousForm.zero(self.field, self.tgt[i] - other.src[k])
                for j in range(len(self.src)):
                    a, b = self.entries[i][j], other.entries[j][k]
                    if a.is_zero() or b.is_zero():
                        continue
                    acc = acc + multiply(a, b)
                row.append(acc)
            out.append(row)
        return FormMatrix(self.field, other.src, self.tgt, out)

    def transpose(self):
        """The dual map O(-tgt) -> O(-src)."""
        ent = [[self.entries[i][j] for i in range(len(self.tgt))] for j in range(len(self.src))]
        return FormMatrix(self.field, [-b for b in self.tgt], [-a for a in self.src], ent)

    def gamma(self, t):
        """Matrix of H^0 on the twist by t."""
        field = self.field
        rdims = [basis_dim(b + t) for b in self.tgt]
        cdims = [basis_dim(a + t) for a in self.src]
        M = field.zeros((sum(rdims), sum(cdims)))
        r0 = 0
        for i, rd in enumerate(rdims):
            c0 = 0
            for j, cd in enumerate(cdims):
                f = self.entries[i][j]
                if rd and cd and not f.is_zero():
                    M[r0:r0 + rd, c0:c0 + cd] = multiplication_matrix(f, self.src[j] + t)
                c0 += cd
            r0 += rd
        return M

    def h3(self, t):
        """Matrix of H^3 on the twist by t, through H^3(O(s)) = (S_{-s-4})^*."""
        field = self.field
        rdims = [basis_dim(-b - t - 4) for b in self.tgt]
        cdims = [basis_dim(-a - t - 4) for a in self.src]
        M = field.zeros((sum(rdims), sum(cdims)))
        r0 = 0
        for i, rd in enumerate(rdims):
            c0 = 0
            for j, cd in enumerate(cdims):
                f = self.entries[i][j]
                if rd and cd and not f.is_zero():
                    M[r0:r0 + rd, c0:c0 + cd] = multiplication_matrix(f, -self.tgt[i] - t - 4).T
                c0 += cd
            r0 += rd
        return M

    def evaluate(self, pt):
        """Raw value matrix at a point given as raw field values."""
        field = self.field
        M = field.zeros(self.shape)
        for i, row in enumerate(self.entries):
            for j, f in enumerate(row):
                if not f.is_zero():
                    M[i, j] = evaluate_raw(f, pt)
        return M

    def __eq__(self, other):
        if not isinstance(other, FormMatrix):
            return NotImplemented
        return (self.field == other.field and self.src == other.src and self.tgt == other.tgt
                and self.entries == other.entries)

    def __repr__(self):
        return f"FormMatrix({self.src} -> {self.tgt})"


def block_diag(field, mats):
    src = sum((m.src for m in mats), ())
    tgt = sum((m.tgt for m in mats), ())
    ent = [[None] * len(src) for _ in tgt]
    r0 = c0 = 0
    for m in mats:
        for i in range(len(m.tgt)):
            for j in range(len(m.src)):
                ent[r0 + i][c0 + j] = m.entries[i][j]
        r0 += len(m.tgt)
        c0 += len(m.src)
    return FormMatrix(field, src, tgt, ent)


@dataclass
class LineComplex:
    """C^start -> C^(start+1) -> ... ; terms[k] lists the line twists of C^(start+k)."""

    field: object
    terms: tuple
    maps: tuple
    start: int = -1

    def __post_init__(self):
        if len(self.maps) != len(self.terms) - 1:
            raise ValueError("need one map between consecutive terms")
        for k, m in enumerate(self.maps):
            if m.src != tuple(self.terms[k]) or m.tgt != tuple(self.terms[k + 1]):
                raise DegreeMismatch(f"map {k} does not match its terms")

    def check_complex(self):
        for a, b in zip(self.maps, self.maps[1:]):
            if not b.compose(a).is_zero():
                return False
        return True

    def rows(self, t):
        """Ranks and dimensions of the Gamma row and the H^3 row at twist t."""
        field = self.field
        g_dim = [sum(basis_dim(a + t) for a in term) for term in self.terms]
        h_dim = [sum(basis_dim(-a - t - 4) for a in term) for term in self.terms]
        g_rank = [rank_array(field, m.gamma(t)) for m in self.maps]
        h_rank = [rank_array(field, m.h3(t)) for m in self.maps]
        return g_dim, g_rank, h_dim, h_rank

    def hypercohomology(self, t):
        g_dim, g_rank, h_dim, h_rank = self.rows(t)
        L = len(self.terms)

        def homology(dims, ranks, k):
            out = dims[k]
            if k < L - 1:
                out -= ranks[k]
            if k > 0:
                out -= ranks[k - 1]
            return out

        e0 = {self.start + k: homology(g_dim, g_rank, k) for k in range(L)}
        e3 = {self.start + k: homology(h_dim, h_rank, k) for k in range(L)}
        for p, v in e0.items():
            if v and not 0 <= p <= 3:
                raise ComplexNotExact(f"H^{p} of the section row is {v} at twist {t}")
        for p, v in e3.items():
            if v and not 0 <= p + 3 <= 3:
                raise ComplexNotExact(f"H^{p + 3} of the top row is {v} at twist {t}")
        for p, v in e3.items():
            if v and e0.get(p + 4, 0):
                raise UnsupportedTerm("complex too long: a d4 differential could be nonzero")
        return tuple(e0.get(i, 0) + e3.get(i - 3, 0) for i in range(4))


def chi_polynomial(chi_fn):
    """Coefficients (c0..c3) with chi(t) = sum c_k t^k, from four exact values."""
    ts = [0, 1, 2, 3]
    vals = [Fraction(chi_fn(t)) for t in ts]
    # Newton divided differences, then expand
    coef = list(vals)
    for j in range(1, 4):
        for i in range(3, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (ts[i] - ts[i - j])
    poly = [Fraction(0)] * 4
    basis = [Fraction(1), Fraction(0), Fraction(0), Fraction(0)]
    for j in range(4):
        for k in range(4):
            poly[k] += coef[j] * basis[k]
        # basis *= (t - ts[j])
        nb = [Fraction(0)] * 4
        for k in range(4):
            if k + 1 < 4:
                nb[k + 1] += basis[k]
            nb[k] -= ts[j] * basis[k]
        basis = nb
    return tuple(poly)


def eval_poly(coeffs, t):
    return sum(c * t ** k for k, c in enumerate(coeffs))


def random_point(field, rng):
    return list(field.random_array(rng, 4))


def points_equal_projectively(field, p, q):
    arr = field.zeros((2, 4))
    arr[0], arr[1] = p, q
    return rank_array(field, arr) < 2


def nonzero(vec):
    return any(v != 0 for v in vec)


def as_array(field, vals):
    a = field.zeros(len(vals))
    for i, v in enumerate(vals):
        a[i] = v
    return a


__all__ = [
    "TwistTerm", "FormMatrix", "LineComplex", "DegreeMismatch", "UnsupportedTerm",
    "ComplexNotExact", "chi_line", "h0_line", "h3_line", "line", "block_diag",
    "chi_polynomial", "eval_poly",
]


