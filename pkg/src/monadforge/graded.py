"""Homogeneous forms in x0..x3 and binary forms in s, t.

Monomials of degree d are ordered lexicographically descending in the
exponent tuple (e0, e1, e2, e3); this order fixes every coefficient vector
and is part of the JSON format.
"""
from __future__ import annotations

from functools import lru_cache
from math import comb

import numpy as np

from .exact_field import DimensionMismatch, FieldElement, rank_array

NVARS = 4


class DegenerateLine(ValueError):
    pass


def basis_dim(d):
    return comb(d + 3, 3) if d >= 0 else 0


@lru_cache(maxsize=None)
def monomials(d):
    if d < 0:
        return ()
    out = []
    for e0 in range(d, -1, -1):
        for e1 in range(d - e0, -1, -1):
            for e2 in range(d - e0 - e1, -1, -1):
                out.append((e0, e1, e2, d - e0 - e1 - e2))
    return tuple(out)


@lru_cache(maxsize=None)
def monomial_index(d):
    return {m: i for i, m in enumerate(monomials(d))}


@lru_cache(maxsize=None)
def shift_index(a, e):
    """Index in degree a+|e| of m*x^e for every monomial m of degree a."""
    idx = monomial_index(a + sum(e))
    return np.array([idx[tuple(x + y for x, y in zip(m, e))] for m in monomials(a)],
                    dtype=np.intp)


def _as_field_array(field, coeffs, n):
    arr = np.asarray(coeffs)
    if arr.dtype != field.dtype or arr.shape != (n,):
        arr = field.array(list(coeffs))
    if arr.shape != (n,):
        raise DimensionMismatch(f"expected {n} coefficients, got {arr.shape}")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


class HomogeneousForm:
    """A degree-d form, stored as its coefficient vector over monomials(d).

    Negative degrees are allowed and denote the (only) zero form with an
    empty coefficient vector.
    """

    __slots__ = ("field", "degree", "coeffs")

    def __init__(self, field, degree, coeffs):
        self.field = field
        self.degree = degree
        self.coeffs = _as_field_array(field, coeffs, basis_dim(degree))

    @classmethod
    def zero(cls, field, degree):
        return cls(field, degree, field.zeros(basis_dim(degree)))

    @classmethod
    def constant(cls, field, c):
        return cls(field, 0, [c])

    @classmethod
    def variable(cls, field, i):
        c = field.zeros(4)
        c[i] = field.one
        return cls(field, 1, c)

    @classmethod
    def from_terms(cls, field, degree, terms):
        """terms: mapping exponent tuple -> scalar."""
        c = field.zeros(basis_dim(degree))
        idx = monomial_index(degree)
        for e, v in terms.items():
            if sum(e) != degree:
                raise ValueError(f"monomial {e} is not of degree {degree}")
            c[idx[tuple(e)]] = field.add(c[idx[tuple(e)]], field.coerce(v))
        return cls(field, degree, c)

    @classmethod
    def linear(cls, field, coeffs):
        return cls(field, 1, coeffs)

    @classmethod
    def random(cls, field, degree, rng):
        return cls(field, degree, field.random_array(rng, basis_dim(degree)))

    def terms(self):
        mons = monomials(self.degree)
        return [(mons[i], v) for i, v in enumerate(self.coeffs) if v != 0]

    def is_zero(self):
        return not any(v != 0 for v in self.coeffs)

    def _same(self, other):
        self.field.check_same(other.field)
        if self.degree != other.degree:
            raise ValueError(f"degree mismatch {self.degree} vs {other.degree}")

    def __add__(self, other):
        self._same(other)
        return HomogeneousForm(self.field, self.degree,
                               self.field.normalize(self.coeffs + other.coeffs))

    def __sub__(self, other):
        self._same(other)
        return HomogeneousForm(self.field, self.degree,
                               self.field.normalize(self.coeffs - other.coeffs))

    def __neg__(self):
        return HomogeneousForm(self.field, self.degree, self.field.normalize(-self.coeffs))

    def scale(self, c):
        c = self.field.coerce(c)
        return HomogeneousForm(self.field, self.degree, self.field.normalize(self.coeffs * c))

    def __mul__(self, other):
        if isinstance(other, HomogeneousForm):
            return multiply(self, other)
        return self.scale(other)

    __rmul__ = scale

    def __eq__(self, other):
        if not isinstance(other, HomogeneousForm):
            return NotImplemented
        if self.field != other.field:
            return False
        if self.is_zero() and other.is_zero():
            return True
        return self.degree == other.degree and bool(np.all(self.coeffs == other.coeffs))

    def __hash__(self):
        return hash((self.field, self.degree, tuple(self.coeffs.tolist())))

    def evaluate(self, point):
        return evaluate(self, point)

    def __repr__(self):
        if self.is_zero():
            return f"0[{self.degree}]"
        parts = []
        for e, v in self.terms():
            mon = "*".join(f"x{i}^{k}" if k > 1 else f"x{i}" for i, k in enumerate(e) if k)
            parts.append(f"{self.field.format(v)}" + (f"*{mon}" if mon else ""))
        return " + ".join(parts)


def multiply(f, g):
    f.field.check_same(g.field)
    field = f.field
    d = f.degree + g.degree
    if f.degree < 0 or g.degree < 0:
        return HomogeneousForm.zero(field, d)
    out = field.zeros(basis_dim(d))
    for e, v in f.terms():
        # shift_index is injective, so plain fancy-index accumulation is safe
        sh = shift_index(g.degree, e)
        out[sh] = field.normalize(out[sh] + g.coeffs * v)
    return HomogeneousForm(field, d, out)


def multiplication_matrix(f, a):
    """Matrix of g -> f*g from S_a to S_{a + deg f} (columns indexed by S_a)."""
    field = f.field
    rows, cols = basis_dim(a + f.degree), basis_dim(a)
    M = field.zeros((rows, cols))
    if rows == 0 or cols == 0:
        return M
    ar = np.arange(cols)
    for e, v in f.terms():
        sh = shift_index(a, e)
        M[sh, ar] = field.normalize(M[sh, ar] + v)
    return M


def evaluate(f, point):
    field = f.field
    pt = [field.coerce(c) for c in point]
    if len(pt) != NVARS:
        raise DimensionMismatch("points have 4 coordinates")
    total = field.zero
    for e, v in f.terms():
        term = v
        for c, k in zip(pt, e):
            for _ in range(k):
                term = field.mul(term, c)
        total = field.add(total, term)
    return FieldElement(field, total)


def evaluate_raw(f, pt):
    """Evaluate at a point given as raw field values (no FieldElement wrapping)."""
    field = f.field
    total = field.zero
    for e, v in f.terms():
        term = v
        for c, k in zip(pt, e):
            for _ in range(k):
                term = field.mul(term, c)
        total = field.add(total, term)
    return total


# ---------------------------------------------------------------------------
# binary forms on P^1, basis s^d, s^(d-1) t, ..., t^d


class BinaryForm:
    __slots__ = ("field", "degree", "coeffs")

    def __init__(self, field, degree, coeffs):
        self.field = field
        self.degree = degree
        self.coeffs = _as_field_array(field, coeffs, max(degree + 1, 0))

    @classmethod
    def zero(cls, field, degree):
        return cls(field, degree, field.zeros(max(degree + 1, 0)))

    def is_zero(self):
        return not any(v != 0 for v in self.coeffs)

    def __add__(self, other):
        self.field.check_same(other.field)
        if self.degree != other.degree:
            raise ValueError("degree mismatch")
        return BinaryForm(self.field, self.degree, self.field.normalize(self.coeffs + other.coeffs))

    def __mul__(self, other):
        return binary_multiply(self, other)

    def __eq__(self, other):
        if not isinstance(other, BinaryForm):
            return NotImplemented
        if self.field != other.field:
            return False
        if self.is_zero() and other.is_zero():
            return True
        return self.degree == other.degree and bool(np.all(self.coeffs == other.coeffs))

    def __hash__(self):
        return hash((self.field, self.degree, tuple(self.coeffs.tolist())))

    def evaluate(self, s, t):
        field = self.field
        s, t = field.coerce(s), field.coerce(t)
        total = field.zero
        for k, v in enumerate(self.coeffs):
            if v == 0:
                continue
            term = v
            for _ in range(self.degree - k):
                term = field.mul(term, s)
            for _ in range(k):
                term = field.mul(term, t)
            total = field.add(total, term)
        return FieldElement(field, total)

    def __repr__(self):
        return f"BinaryForm({self.degree}, {[self.field.format(v) for v in self.coeffs]})"


def binary_multiply(f, g):
    f.field.check_same(g.field)
    field = f.field
    d = f.degree + g.degree
    if f.degree < 0 or g.degree < 0:
        return BinaryForm.zero(field, d)
    out = field.zeros(d + 1)
    for k, v in enumerate(f.coeffs):
        if v == 0:
            continue
        out[k:k + g.degree + 1] = out[k:k + g.degree + 1] + g.coeffs * v
        out = field.normalize(out)
    return BinaryForm(field, d, out)


def binary_multiplication_matrix(f, a):
    field = f.field
    rows, cols = max(a + f.degree + 1, 0), max(a + 1, 0)
    M = field.zeros((rows, cols))
    if rows == 0 or cols == 0:
        return M
    for j in range(cols):
        M[j:j + f.degree + 1, j] = f.coeffs
    return M


class LineRestrictor:
    """Substitution x = s*p + t*q, with monomial images cached per degree."""

    def __init__(self, field, p, q):
        self.field = field
        self.p = [field.coerce(c) for c in p]
        self.q = [field.coerce(c) for c in q]
        if len(self.p) != NVARS or len(self.q) != NVARS:
            raise DimensionMismatch("points have 4 coordinates")
        pq = field.zeros((2, 4))
        pq[0] = self.p
        pq[1] = self.q
        if rank_array(field, pq) < 2:
            raise DegenerateLine("p and q span a single point")
        self.linear = [BinaryForm(field, 1, [self.p[i], self.q[i]]) for i in range(NVARS)]
        self._images = {0: field.identity(1)}

    def images(self, d):
        """Matrix whose column j is the binary restriction of monomial j of degree d."""
        if d < 0:
            return self.field.zeros((0, 0))
        if d not in self._images:
            prev = self.images(d - 1)
            field = self.field
            M = field.zeros((d + 1, basis_dim(d)))
            idx_prev = monomial_index(d - 1)
            for j, m in enumerate(monomials(d)):
                i = next(k for k in range(NVARS) if m[k] > 0)
                lower = list(m)
                lower[i] -= 1
                col = prev[:, idx_prev[tuple(lower)]]
                lin = self.linear[i].coeffs
                res = field.zeros(d + 1)
                res[:d] = res[:d] + col * lin[0]
                res[1:] = res[1:] + col * lin[1]
                M[:, j] = field.normalize(res)
            self._images[d] = M
        return self._images[d]

    def restrict(self, f):
        self.field.check_same(f.field)
        if f.degree < 0:
            return BinaryForm.zero(self.field, f.degree)
        M = self.images(f.degree)
        return BinaryForm(self.field, f.degree, self.field.matmul(M, f.coeffs.reshape(-1, 1)).ravel())


def restrict_to_line(f, p, q):
    return LineRestrictor(f.field, p, q).restrict(f)


def variables(field):
    return [HomogeneousForm.variable(field, i) for i in range(NVARS)]


def degree_of_length(n):
    """Inverse of basis_dim on its image; None if n is not a binomial C(d+3,3)."""
    d = 0
    while basis_dim(d) < n:
        d += 1
    return d if basis_dim(d) == n else None


def form_to_json(f):
    return [f.field.format(v) for v in f.coeffs]


def form_from_json(field, arr, degree=None):
    if degree is None:
        degree = degree_of_length(len(arr))
        if degree is None:
            raise DimensionMismatch(f"{len(arr)} is not the size of any graded piece")
    if not arr:
        return HomogeneousForm.zero(field, degree)
    return HomogeneousForm(field, degree, [field.parse(str(s)) for s in arr])
