"""Sections of Omega^1(d), Omega^2(d) and the Koszul maps resolving them.

Omega^1(k) = ker(U O(k-1) -> O(k)),  e_i -> x_i
Omega^2(k) = ker(wedge^2 U O(k-2) -> U O(k-1)),  e_i^e_j -> x_i e_j - x_j e_i
"""
from __future__ import annotations

from .complexes import FormMatrix
from .exact_field import kernel_array
from .graded import HomogeneousForm, basis_dim, form_from_json, form_to_json, variables

PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


class KoszulViolation(ValueError):
    pass


def euler_map(field, k):
    """U O(k-1) -> O(k)."""
    return FormMatrix(field, [k - 1] * 4, [k], [variables(field)])


def koszul2_map(field, k):
    """wedge^2 U O(k-2) -> U O(k-1)."""
    xs = variables(field)
    ent = [[None] * 6 for _ in range(4)]
    for c, (i, j) in enumerate(PAIRS):
        ent[j][c] = xs[i]
        ent[i][c] = -xs[j]
    return FormMatrix(field, [k - 2] * 6, [k - 1] * 4, ent)


def resolution_map(field, p, k):
    return euler_map(field, k) if p == 1 else koszul2_map(field, k)


def lift_twists(p, k):
    """Twists of the free module carrying the section data of Omega^p(k)."""
    return [k - 1] * 4 if p == 1 else [k - 2] * 6


class OmegaSection:
    """A global section of Omega^p(degree), stored through its Koszul lift."""

    __slots__ = ("field", "p", "degree", "data")

    def __init__(self, field, p, degree, data, check=True):
        if p not in (1, 2):
            raise ValueError("p must be 1 or 2")
        self.field, self.p, self.degree = field, p, degree
        tw = lift_twists(p, degree)
        if len(data) != len(tw):
            raise KoszulViolation(f"Omega^{p} sections carry {len(tw)} forms")
        fixed = []
        for f, d in zip(data, tw):
            field.check_same(f.field)
            if f.degree != d:
                if not f.is_zero():
                    raise KoszulViolation(f"form of degree {f.degree}, expected {d}")
                f = HomogeneousForm.zero(field, d)
            fixed.append(f)
        self.data = tuple(fixed)
        if check and not self.relation_holds():
            raise KoszulViolation("Euler/Koszul contraction does not vanish")

    def relation_holds(self):
        m = resolution_map(self.field, self.p, self.degree)
        col = FormMatrix(self.field, [0], lift_twists(self.p, self.degree),
                         [[f] for f in self.data])
        return m.compose(col).is_zero()

    @classmethod
    def zero(cls, field, p, degree):
        return cls(field, p, degree, [HomogeneousForm.zero(field, d)
                                      for d in lift_twists(p, degree)], check=False)

    @classmethod
    def random(cls, field, p, degree, rng):
        """A uniformly random combination of a basis of H^0(Omega^p(degree))."""
        K = section_basis(field, p, degree)
        tw = lift_twists(p, degree)
        if K.shape[1] == 0:
            return cls.zero(field, p, degree)
        v = field.matmul(K, field.random_array(rng, (K.shape[1], 1))).ravel()
        return cls(field, p, degree, _split(field, v, tw))

    def is_zero(self):
        return all(f.is_zero() for f in self.data)

    def __eq__(self, other):
        if not isinstance(other, OmegaSection):
            return NotImplemented
        return (self.field == other.field and self.p == other.p
                and self.degree == other.degree and self.data == other.data)

    def __hash__(self):
        return hash((self.p, self.degree, self.data))

    def to_json(self):
        return {"omega": self.p, "degree": self.degree,
                "data": [form_to_json(f) for f in self.data]}

    @staticmethod
    def from_json(field, obj):
        p, d = int(obj["omega"]), int(obj["degree"])
        tw = lift_twists(p, d)
        return OmegaSection(field, p, d, [form_from_json(field, a, t)
                                          for a, t in zip(obj["data"], tw)])

    def __repr__(self):
        return f"OmegaSection(p={self.p}, degree={self.degree})"


def section_basis(field, p, degree):
    """Columns: coefficient vectors (concatenated lift forms) spanning H^0(Omega^p(degree))."""
    return kernel_array(field, resolution_map(field, p, degree).gamma(0))


def _split(field, vec, twists):
    out, pos = [], 0
    for d in twists:
        n = basis_dim(d)
        out.append(HomogeneousForm(field, d, vec[pos:pos + n]) if d >= 0
                   else HomogeneousForm.zero(field, d))
        pos += n
    return out


