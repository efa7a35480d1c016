"""Exact scalars and dense exact linear algebra.

Three field kinds are supported: a prime field F_p, the rationals, and the
Gaussian rationals Q(i).  Matrices keep their entries in a numpy array
(int64 residues for F_p, Python objects otherwise) and all elimination is
exact.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

DEFAULT_PRIME = 32003


class FieldMismatch(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


def _is_prime(n):
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


class GaussianRational:
    """a + b*i with a, b rational, always stored reduced."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def _wrap(other):
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (int, Fraction, np.integer)):
            return GaussianRational(int(other) if isinstance(other, np.integer) else other)
        return None

    def __add__(self, other):
        o = self._wrap(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._wrap(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._wrap(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._wrap(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def norm(self):
        return self.re * self.re + self.im * self.im

    def conj(self):
        return GaussianRational(self.re, -self.im)

    def inverse(self):
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        return GaussianRational(self.re / n, -self.im / n)

    def __truediv__(self, other):
        o = self._wrap(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._wrap(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __eq__(self, other):
        o = self._wrap(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"


def _frac_str(q):
    return f"{q.numerator}/{q.denominator}"


_FRAC = r"[+-]?\d+(?:/\d+)?"
_GAUSS_RE = re.compile(rf"^(?P<re>{_FRAC})(?:\+?(?P<im>{_FRAC})\*i)?$")
_GAUSS_IM = re.compile(rf"^(?P<im>{_FRAC})\*i$")


@dataclass(frozen=True)
class Field:
    """Base class; concrete kinds are PrimeField, RationalField, GaussianField."""

    @property
    def kind(self):
        raise NotImplementedError

    def check_same(self, other):
        if self != other:
            raise FieldMismatch(f"cannot mix {self} and {other}")

    def element(self, v):
        return FieldElement(self, self.coerce(v))

    def to_json(self):
        return {"kind": self.kind}

    @staticmethod
    def from_json(obj):
        kind = obj["kind"]
        if kind == "prime":
            return PrimeField(int(obj["p"]))
        if kind == "rational":
            return RationalField()
        if kind == "gaussian":
            return GaussianField()
        raise ValueError(f"unknown field kind {kind!r}")

    @staticmethod
    def from_spec(spec):
        """Parse CLI-style field specs: 'prime:32003', 'rational', 'gaussian'."""
        if spec.startswith("prime"):
            _, _, p = spec.partition(":")
            return PrimeField(int(p) if p else DEFAULT_PRIME)
        if spec in ("rational", "q", "Q"):
            return RationalField()
        if spec in ("gaussian", "Q(i)"):
            return GaussianField()
        raise ValueError(f"bad field spec {spec!r}")

    # array helpers
    def array(self, values, shape=None):
        a = np.empty(len(values), dtype=self.dtype)
        for i, v in enumerate(values):
            a[i] = self.coerce(v)
        if shape is not None:
            a = a.reshape(shape)
        return a

    def zeros(self, shape):
        if self.dtype is object:
            a = np.empty(shape, dtype=object)
            a.fill(self.zero)
            return a
        return np.zeros(shape, dtype=self.dtype)

    def identity(self, n):
        a = self.zeros((n, n))
        for i in range(n):
            a[i, i] = self.one
        return a

    def matmul(self, a, b):
        if a.shape[1] != b.shape[0]:
            raise DimensionMismatch(f"{a.shape} @ {b.shape}")
        if a.shape[1] == 0:
            return self.zeros((a.shape[0], b.shape[1]))
        return self.normalize(a @ b)


@dataclass(frozen=True)
class PrimeField(Field):
    p: int = DEFAULT_PRIME

    def __post_init__(self):
        if not _is_prime(self.p) or self.p < 3:
            raise ValueError(f"{self.p} is not an odd prime")
        if self.p >= 2**31:
            raise ValueError("prime too large for int64 elimination")

    @property
    def kind(self):
        return "prime"

    dtype = np.int64

    @property
    def zero(self):
        return 0

    @property
    def one(self):
        return 1

    def coerce(self, v):
        if isinstance(v, FieldElement):
            self.check_same(v.field)
            return v.value
        if isinstance(v, str):
            return self.parse(v)
        if isinstance(v, Fraction):
            return (v.numerator * pow(v.denominator, -1, self.p)) % self.p
        if isinstance(v, (int, np.integer)):
            return int(v) % self.p
        raise TypeError(f"cannot coerce {v!r} into {self}")

    def parse(self, s):
        s = s.strip()
        if "/" in s:
            return self.coerce(Fraction(s))
        return int(s) % self.p

    def format(self, v):
        return str(int(v))

    def normalize(self, a):
        return np.mod(a, self.p)

    def inv(self, v):
        v = int(v) % self.p
        if v == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(v, self.p - 2, self.p)

    def add(self, a, b):
        return (a + b) % self.p

    def mul(self, a, b):
        return (int(a) * int(b)) % self.p

    def neg(self, a):
        return (-a) % self.p

    def random_array(self, rng, shape):
        return rng.integers(0, self.p, size=shape, dtype=np.int64)

    def to_json(self):
        return {"kind": "prime", "p": self.p}

    def __str__(self):
        return f"F_{self.p}"


@dataclass(frozen=True)
class RationalField(Field):
    @property
    def kind(self):
        return "rational"

    dtype = object

    @property
    def zero(self):
        return Fraction(0)

    @property
    def one(self):
        return Fraction(1)

    def coerce(self, v):
        if isinstance(v, FieldElement):
            self.check_same(v.field)
            return v.value
        if isinstance(v, str):
            return Fraction(v.strip())
        if isinstance(v, (int, Fraction)):
            return Fraction(v)
        if isinstance(v, np.integer):
            return Fraction(int(v))
        raise TypeError(f"cannot coerce {v!r} into {self}")

    parse = coerce

    def format(self, v):
        return _frac_str(v)

    def normalize(self, a):
        return a

    def inv(self, v):
        if v == 0:
            raise ZeroDivisionError("inverse of zero")
        return 1 / Fraction(v)

    def add(self, a, b):
        return a + b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def random_array(self, rng, shape, bound=5):
        vals = rng.integers(-bound, bound + 1, size=shape)
        out = np.empty(vals.shape, dtype=object)
        for idx, v in np.ndenumerate(vals):
            out[idx] = Fraction(int(v))
        return out

    def __str__(self):
        return "QQ"


@dataclass(frozen=True)
class GaussianField(Field):
    @property
    def kind(self):
        return "gaussian"

    dtype = object

    @property
    def zero(self):
        return GaussianRational(0)

    @property
    def one(self):
        return GaussianRational(1)

    def coerce(self, v):
        if isinstance(v, FieldElement):
            self.check_same(v.field)
            return v.value
        if isinstance(v, GaussianRational):
            return v
        if isinstance(v, str):
            return self.parse(v)
        if isinstance(v, complex):
            return GaussianRational(Fraction(v.real), Fraction(v.imag))
        if isinstance(v, (int, Fraction)):
            return GaussianRational(v)
        if isinstance(v, np.integer):
            return GaussianRational(int(v))
        raise TypeError(f"cannot coerce {v!r} into {self}")

    def parse(self, s):
        s = s.replace(" ", "")
        m = _GAUSS_RE.match(s)
        if m:
            return GaussianRational(Fraction(m["re"]), Fraction(m["im"] or 0))
        m = _GAUSS_IM.match(s)
        if m:
            return GaussianRational(0, Fraction(m["im"]))
        raise ValueError(f"bad Gaussian rational {s!r}")

    def format(self, v):
        return f"{_frac_str(v.re)}+{_frac_str(v.im)}*i"

    def normalize(self, a):
        return a

    def inv(self, v):
        return v.inverse()

    def add(self, a, b):
        return a + b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def conj(self, v):
        return v.conj()

    def random_array(self, rng, shape, bound=5):
        re_ = rng.integers(-bound, bound + 1, size=shape)
        im_ = rng.integers(-bound, bound + 1, size=shape)
        out = np.empty(re_.shape, dtype=object)
        for idx, v in np.ndenumerate(re_):
            out[idx] = GaussianRational(int(v), int(im_[idx]))
        return out

    def __str__(self):
        return "QQ(i)"


class FieldElement:
    """A scalar tagged with its field; arithmetic across fields is refused."""

    __slots__ = ("field", "value")

    def __init__(self, field, value):
        self.field = field
        self.value = field.coerce(value)

    def _other(self, other):
        if isinstance(other, FieldElement):
            self.field.check_same(other.field)
            return other.value
        if isinstance(other, (int, Fraction)):
            return self.field.coerce(other)
        return None

    def __add__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return FieldElement(self.field, self.field.add(self.value, o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return FieldElement(self.field, self.field.add(self.value, self.field.neg(o)))

    def __rsub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return FieldElement(self.field, self.field.add(o, self.field.neg(self.value)))

    def __mul__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return FieldElement(self.field, self.field.mul(self.value, o))

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(self.field, self.field.neg(self.value))

    def inverse(self):
        return FieldElement(self.field, self.field.inv(self.value))

    def __truediv__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self * FieldElement(self.field, self.field.inv(o))

    def conj(self):
        if not isinstance(self.field, GaussianField):
            raise FieldMismatch("conjugation needs Gaussian rationals")
        return FieldElement(self.field, self.value.conj())

    def is_zero(self):
        return self.value == 0

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.field == other.field and self.value == other.value
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self.value == o

    def __hash__(self):
        return hash((self.field, self.value))

    def __str__(self):
        return self.field.format(self.value)

    def __repr__(self):
        return f"FieldElement({self.field}, {self.field.format(self.value)})"


# ---------------------------------------------------------------------------
# elimination on raw arrays


def _nonzero_idx(col):
    if col.dtype == object:
        return np.array([i for i, v in enumerate(col) if v != 0], dtype=np.intp)
    return np.flatnonzero(col)


def rref_array(field, arr):
    """Reduced row echelon form of a raw field array; returns (R, pivots)."""
    a = np.array(arr, dtype=field.dtype, copy=True)
    nrows, ncols = a.shape
    pivots = []
    r = 0
    prime = isinstance(field, PrimeField)
    p = field.p if prime else None
    for c in range(ncols):
        if r == nrows:
            break
        nz = _nonzero_idx(a[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        inv = field.inv(a[r, c])
        if prime:
            a[r, c:] = (a[r, c:] * inv) % p
        else:
            a[r, c:] = a[r, c:] * inv
        col = a[:, c].copy()
        col[r] = field.zero
        rows = _nonzero_idx(col)
        if rows.size:
            upd = np.multiply.outer(col[rows], a[r, c:])
            if prime:
                a[rows, c:] = (a[rows, c:] - upd) % p
            else:
                a[rows, c:] = a[rows, c:] - upd
        pivots.append(c)
        r += 1
    return a, pivots


def rank_array(field, arr):
    if arr.size == 0:
        return 0
    if arr.shape[0] > arr.shape[1]:
        arr = arr.T
    return len(rref_array(field, arr)[1])


def kernel_array(field, arr):
    """Columns spanning {v : arr v = 0}, as a (cols x nullity) raw array."""
    nrows, ncols = arr.shape
    if nrows == 0:
        return field.identity(ncols)
    R, pivots = rref_array(field, arr)
    free = [c for c in range(ncols) if c not in set(pivots)]
    K = field.zeros((ncols, len(free)))
    for j, f in enumerate(free):
        K[f, j] = field.one
        for i, pc in enumerate(pivots):
            K[pc, j] = field.neg(R[i, f])
    return K


def row_basis_array(field, arr):
    """Nonzero rows of the rref: a basis of the row space."""
    if arr.shape[0] == 0:
        return arr
    R, pivots = rref_array(field, arr)
    return R[: len(pivots)]


def solve_array(field, arr, b):
    nrows, ncols = arr.shape
    if len(b) != nrows:
        raise DimensionMismatch(f"rhs length {len(b)} != {nrows} rows")
    aug = np.concatenate([arr, np.asarray(b, dtype=field.dtype).reshape(nrows, 1)], axis=1) \
        if nrows else field.zeros((0, ncols + 1))
    R, pivots = rref_array(field, aug)
    if pivots and pivots[-1] == ncols:
        return None
    x = field.zeros(ncols)
    for i, pc in enumerate(pivots):
        x[pc] = R[i, ncols]
    return x


# ---------------------------------------------------------------------------


class DenseMatrix:
    """Immutable dense matrix over one exact field."""

    __slots__ = ("field", "data")

    def __init__(self, field, data):
        if isinstance(data, np.ndarray) and data.dtype == field.dtype and data.ndim == 2:
            arr = data.copy()
        else:
            rows = [list(r) for r in data]
            ncols = len(rows[0]) if rows else 0
            if any(len(r) != ncols for r in rows):
                raise DimensionMismatch("ragged rows")
            arr = field.zeros((len(rows), ncols))
            for i, r in enumerate(rows):
                for j, v in enumerate(r):
                    arr[i, j] = field.coerce(v)
        arr.flags.writeable = False
        self.field = field
        self.data = arr

    @classmethod
    def zeros(cls, field, rows, cols):
        return cls(field, field.zeros((rows, cols)))

    @classmethod
    def identity(cls, field, n):
        return cls(field, field.identity(n))

    @classmethod
    def random(cls, field, rows, cols, rng):
        return cls(field, field.random_array(rng, (rows, cols)))

    @property
    def shape(self):
        return self.data.shape

    @property
    def rows(self):
        return self.data.shape[0]

    @property
    def cols(self):
        return self.data.shape[1]

    @property
    def field_kind(self):
        return self.field.kind

    def __getitem__(self, idx):
        i, j = idx
        return FieldElement(self.field, self.data[i, j])

    def _check(self, other):
        if not isinstance(other, DenseMatrix):
            raise TypeError("expected DenseMatrix")
        self.field.check_same(other.field)

    def __matmul__(self, other):
        self._check(other)
        return DenseMatrix(self.field, self.field.matmul(self.data, other.data))

    def __add__(self, other):
        self._check(other)
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} + {other.shape}")
        return DenseMatrix(self.field, self.field.normalize(self.data + other.data))

    def __sub__(self, other):
        self._check(other)
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} - {other.shape}")
        return DenseMatrix(self.field, self.field.normalize(self.data - other.data))

    def __neg__(self):
        return DenseMatrix(self.field, self.field.normalize(-self.data))

    def __eq__(self, other):
        if not isinstance(other, DenseMatrix):
            return NotImplemented
        return (self.field == other.field and self.shape == other.shape
                and bool(np.all(self.data == other.data)))

    def __hash__(self):
        return hash((self.field, self.shape, tuple(self.data.ravel().tolist())))

    def transpose(self):
        return DenseMatrix(self.field, self.data.T.copy())

    T = property(transpose)

    def apply(self, vec):
        v = np.asarray([self.field.coerce(x) for x in vec], dtype=self.field.dtype)
        if len(v) != self.cols:
            raise DimensionMismatch("vector length")
        return self.field.matmul(self.data, v.reshape(-1, 1)).ravel()

    def rref(self):
        R, piv = rref_array(self.field, self.data)
        return DenseMatrix(self.field, R), piv

    def rank(self):
        return rank_array(self.field, self.data)

    def kernel_basis(self):
        return DenseMatrix(self.field, kernel_array(self.field, self.data))

    def solve(self, b):
        bb = [self.field.coerce(x) for x in b]
        x = solve_array(self.field, self.data, bb)
        return None if x is None else [FieldElement(self.field, v) for v in x]

    def is_zero(self):
        return not any(v != 0 for v in self.data.ravel())

    def to_rows(self):
        return [[self.field.format(v) for v in row] for row in self.data]

    def __repr__(self):
        return f"DenseMatrix({self.field}, {self.to_rows()})"


def rref(m):
    return m.rref()


def kernel_basis(m):
    return m.kernel_basis()


def rank(m):
    return m.rank()


def solve(m, b):
    return m.solve(b)


def hstack(mats):
    f = mats[0].field
    for m in mats[1:]:
        f.check_same(m.field)
    return DenseMatrix(f, np.concatenate([m.data for m in mats], axis=1))


def vstack(mats):
    f = mats[0].field
    for m in mats[1:]:
        f.check_same(m.field)
    return DenseMatrix(f, np.concatenate([m.data for m in mats], axis=0))
