"""Exact ring and semiring arithmetic with fallible inversion.

Three coefficient systems are supported:

* ``q``      -- the rational numbers (:class:`fractions.Fraction`)
* ``mat:N``  -- N x N matrices over the rationals (:class:`Matrix`)
* ``trop``   -- the tropical max-plus semiring (:class:`Tropical`)

Elements are immutable and canonical, so ``==`` is structural equality.
Inversion never raises on a mathematical failure; it returns the absorbing
:data:`UNDEFINED` sentinel instead.  All binary operations of a :class:`Ring`
propagate :data:`UNDEFINED`.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Iterable, Optional

from .rng import SplitMix64

__all__ = [
    "UNDEFINED",
    "StructureError",
    "RingDescriptor",
    "Matrix",
    "Tropical",
    "Ring",
    "RationalField",
    "MatrixRing",
    "TropicalSemiring",
    "make_ring",
    "parse_ring",
    "add",
    "mul",
    "try_invert",
    "check_inverse_laws",
    "check_sum_inverse_identity",
    "random_invertible",
    "format_fraction",
    "parse_fraction",
]


class StructureError(ValueError):
    """A caller error: mismatched rings, sentinel toggles, malformed input.

    Distinct from :data:`UNDEFINED`, which signals a legitimate
    non-invertibility inside a partial map.
    """


class _Undefined:
    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNDEFINED"

    def __reduce__(self):
        return (_Undefined, ())


UNDEFINED = _Undefined()


# ---------------------------------------------------------------------------
# rationals

_FRACTION_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")


def format_fraction(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(text) -> Fraction:
    """Parse ``"p/q"`` or ``"p"``; integers are accepted as well."""
    if isinstance(text, bool):
        raise StructureError(f"not a rational: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise StructureError(f"not a rational: {text!r}")
    m = _FRACTION_RE.match(text)
    if not m:
        raise StructureError(f"not a rational: {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise StructureError(f"zero denominator in {text!r}")
    return Fraction(num, den)


# ---------------------------------------------------------------------------
# matrices


class Matrix:
    """A square matrix of rationals stored as ``nums / den``.

    ``nums`` is a flat row-major tuple of integers and ``den`` a positive
    integer with ``gcd(den, *nums) == 1``.  This keeps equality structural
    while letting products run on plain integers.
    """

    __slots__ = ("dim", "nums", "den", "_hash")

    def __init__(self, dim: int, nums, den: int = 1):
        nums = tuple(nums)
        if len(nums) != dim * dim:
            raise StructureError(f"expected {dim * dim} entries, got {len(nums)}")
        if den == 0:
            raise StructureError("zero denominator")
        if den < 0:
            nums = tuple(-x for x in nums)
            den = -den
        g = reduce(gcd, nums, den)
        if g > 1:
            nums = tuple(x // g for x in nums)
            den //= g
        self.dim = dim
        self.nums = nums
        self.den = den
        self._hash = None

    @classmethod
    def from_rows(cls, rows) -> "Matrix":
        rows = [[Fraction(x) for x in row] for row in rows]
        dim = len(rows)
        if any(len(row) != dim for row in rows):
            raise StructureError("matrix must be square")
        den = 1
        for row in rows:
            for x in row:
                den = den * x.denominator // gcd(den, x.denominator)
        nums = [x.numerator * (den // x.denominator) for row in rows for x in row]
        return cls(dim, nums, den)

    @classmethod
    def identity(cls, dim: int) -> "Matrix":
        return cls(dim, [int(i == j) for i in range(dim) for j in range(dim)])

    @classmethod
    def zeros(cls, dim: int) -> "Matrix":
        return cls(dim, [0] * (dim * dim))

    def rows(self) -> list:
        n = self.dim
        return [
            [Fraction(self.nums[i * n + j], self.den) for j in range(n)]
            for i in range(n)
        ]

    def __getitem__(self, ij) -> Fraction:
        i, j = ij
        return Fraction(self.nums[i * self.dim + j], self.den)

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.dim == other.dim and self.den == other.den and self.nums == other.nums

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.dim, self.den, self.nums))
        return self._hash

    def __repr__(self):
        body = ", ".join(
            "[" + ", ".join(str(x) for x in row) + "]" for row in self.rows()
        )
        return f"Matrix([{body}])"

    def _check(self, other):
        if not isinstance(other, Matrix) or other.dim != self.dim:
            raise StructureError(f"cannot combine {self!r} with {other!r}")

    def __add__(self, other):
        self._check(other)
        d1, d2 = self.den, other.den
        if d1 == d2:
            return Matrix(self.dim, [x + y for x, y in zip(self.nums, other.nums)], d1)
        return Matrix(
            self.dim,
            [x * d2 + y * d1 for x, y in zip(self.nums, other.nums)],
            d1 * d2,
        )

    def __mul__(self, other):
        self._check(other)
        n = self.dim
        a, b = self.nums, other.nums
        out = []
        for i in range(n):
            row = a[i * n:(i + 1) * n]
            for j in range(n):
                out.append(sum(row[k] * b[k * n + j] for k in range(n)))
        return Matrix(n, out, self.den * other.den)

    def __neg__(self):
        return Matrix(self.dim, [-x for x in self.nums], self.den)

    def __sub__(self, other):
        return self + (-other)

    def is_zero(self) -> bool:
        return not any(self.nums)

    def determinant(self) -> Fraction:
        det, _ = _bareiss_inverse(self.dim, list(self.nums))
        return Fraction(det, self.den ** self.dim)

    def inverse(self) -> Optional["Matrix"]:
        """Two-sided inverse, or ``None`` when singular."""
        det, adj = _bareiss_inverse(self.dim, list(self.nums))
        if det == 0:
            return None
        # inv(N / den) = den * inv(N) = den * adj / det
        return Matrix(self.dim, [self.den * x for x in adj], det)

    def bits(self) -> int:
        return max([self.den.bit_length()] + [abs(x).bit_length() for x in self.nums])


def _bareiss_inverse(n: int, nums: list) -> tuple:
    """Fraction-free Gauss-Jordan elimination on ``[N | I]`` over the integers.

    Returns ``(det(N), det(N) * inv(N))`` with the second item flattened
    row-major; ``(0, None)`` when N is singular.  Pivots are chosen by
    largest absolute value within the column.  Every division is exact.
    """
    width = 2 * n
    m = [nums[i * n:(i + 1) * n] + [int(i == j) for j in range(n)] for i in range(n)]
    prev = 1
    sign = 1
    for k in range(n):
        piv = max(range(k, n), key=lambda r: abs(m[r][k]))
        if m[piv][k] == 0:
            return 0, None
        if piv != k:
            m[k], m[piv] = m[piv], m[k]
            sign = -sign
        pk = m[k]
        pkk = pk[k]
        for i in range(n):
            if i == k:
                continue
            row = m[i]
            rik = row[k]
            m[i] = [(pkk * row[j] - rik * pk[j]) // prev for j in range(width)]
        prev = pkk
    # the left block is now det(PN) * I; undo the row-swap sign
    det = m[n - 1][n - 1] if n else 1
    adj = [m[i][n + j] for i in range(n) for j in range(n)]
    return sign * det, [sign * x for x in adj]


# ---------------------------------------------------------------------------
# tropical numbers


class Tropical:
    """An element of the max-plus semiring; ``value is None`` encodes -inf."""

    __slots__ = ("value",)

    def __init__(self, value=None):
        self.value = None if value is None else Fraction(value)

    @property
    def is_neg_inf(self) -> bool:
        return self.value is None

    def __eq__(self, other):
        if not isinstance(other, Tropical):
            return NotImplemented
        return self.value == other.value

    def __hash__(self):
        return hash(("trop", self.value))

    def __repr__(self):
        return "Tropical(-inf)" if self.value is None else f"Tropical({self.value})"

    def __add__(self, other):
        if not isinstance(other, Tropical):
            raise StructureError(f"cannot combine {self!r} with {other!r}")
        if self.value is None:
            return other
        if other.value is None:
            return self
        return self if self.value >= other.value else other

    def __mul__(self, other):
        if not isinstance(other, Tropical):
            raise StructureError(f"cannot combine {self!r} with {other!r}")
        if self.value is None or other.value is None:
            return Tropical(None)
        return Tropical(self.value + other.value)


# ---------------------------------------------------------------------------
# rings


@dataclass(frozen=True)
class RingDescriptor:
    kind: str
    dim: Optional[int] = None

    KINDS = ("exact_rational", "rational_matrix", "tropical_max_plus")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise StructureError(f"unknown ring kind {self.kind!r}")
        if self.kind == "rational_matrix":
            if not isinstance(self.dim, int) or self.dim < 1:
                raise StructureError("rational_matrix needs dim >= 1")
        elif self.dim is not None:
            raise StructureError(f"{self.kind} takes no dim")

    @property
    def is_ring(self) -> bool:
        return self.kind != "tropical_max_plus"

    @property
    def spec(self) -> str:
        if self.kind == "exact_rational":
            return "q"
        if self.kind == "rational_matrix":
            return f"mat:{self.dim}"
        return "trop"

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.dim is not None:
            out["dim"] = self.dim
        return out

    @classmethod
    def from_json(cls, obj) -> "RingDescriptor":
        if not isinstance(obj, dict) or "kind" not in obj:
            raise StructureError(f"bad ring descriptor: {obj!r}")
        return cls(obj["kind"], obj.get("dim"))


class Ring:
    """Arithmetic for one coefficient system.

    ``add``/``mul``/``try_invert`` are the partial-arithmetic entry points:
    any :data:`UNDEFINED` operand yields :data:`UNDEFINED`.
    """

    descriptor: RingDescriptor
    element_type: type

    @property
    def zero(self):
        raise NotImplementedError

    @property
    def one(self):
        raise NotImplementedError

    def __eq__(self, other):
        return isinstance(other, Ring) and self.descriptor == other.descriptor

    def __hash__(self):
        return hash(self.descriptor)

    def __repr__(self):
        return f"{type(self).__name__}({self.descriptor.spec})"

    def check(self, x):
        if not isinstance(x, self.element_type):
            raise StructureError(f"{x!r} is not an element of {self!r}")
        return x

    def add(self, x, y):
        if x is UNDEFINED or y is UNDEFINED:
            return UNDEFINED
        self.check(x)
        self.check(y)
        return x + y

    def mul(self, x, y):
        if x is UNDEFINED or y is UNDEFINED:
            return UNDEFINED
        self.check(x)
        self.check(y)
        return x * y

    def try_invert(self, x):
        if x is UNDEFINED:
            return UNDEFINED
        self.check(x)
        inv = self._invert(x)
        return UNDEFINED if inv is None else inv

    def _invert(self, x):
        raise NotImplementedError

    def sum(self, items: Iterable):
        total = self.zero
        for x in items:
            total = self.add(total, x)
            if total is UNDEFINED:
                return UNDEFINED
        return total

    def prod(self, items: Iterable):
        total = self.one
        for x in items:
            total = self.mul(total, x)
            if total is UNDEFINED:
                return UNDEFINED
        return total

    def is_invertible(self, x) -> bool:
        return self.try_invert(x) is not UNDEFINED

    def from_int(self, k: int):
        raise NotImplementedError

    def draw(self, rng: SplitMix64, bound: int):
        """An arbitrary (not necessarily invertible) element."""
        raise NotImplementedError

    def draw_invertible(self, rng: SplitMix64, bound: int, max_tries: int = 1000):
        for _ in range(max_tries):
            x = self.draw(rng, bound)
            if self.is_invertible(x):
                return x
        raise StructureError(f"no invertible element of {self!r} after {max_tries} draws")

    def bits(self, x) -> int:
        raise NotImplementedError

    def to_json(self, x):
        raise NotImplementedError

    def from_json(self, obj):
        raise NotImplementedError

    def format(self, x) -> str:
        if x is UNDEFINED:
            return "undefined"
        return str(self.to_json(x))


class RationalField(Ring):
    descriptor = RingDescriptor("exact_rational")
    element_type = Fraction

    @property
    def zero(self):
        return Fraction(0)

    @property
    def one(self):
        return Fraction(1)

    def check(self, x):
        if type(x) is not Fraction:
            raise StructureError(f"{x!r} is not an element of {self!r}")
        return x

    def _invert(self, x):
        return None if x == 0 else 1 / x

    def from_int(self, k):
        return Fraction(k)

    def draw(self, rng, bound):
        return Fraction(rng.randint(-bound, bound), rng.randint(1, bound))

    def bits(self, x):
        return max(abs(x.numerator).bit_length(), x.denominator.bit_length())

    def to_json(self, x):
        return format_fraction(x)

    def from_json(self, obj):
        return parse_fraction(obj)

    def format(self, x):
        if x is UNDEFINED:
            return "undefined"
        return str(x)


class MatrixRing(Ring):
    element_type = Matrix

    def __init__(self, dim: int):
        self.descriptor = RingDescriptor("rational_matrix", dim)
        self.dim = dim
        self._zero = Matrix.zeros(dim)
        self._one = Matrix.identity(dim)

    @property
    def zero(self):
        return self._zero

    @property
    def one(self):
        return self._one

    def check(self, x):
        if type(x) is not Matrix or x.dim != self.dim:
            raise StructureError(f"{x!r} is not an element of {self!r}")
        return x

    def _invert(self, x):
        return x.inverse()

    def from_int(self, k):
        return Matrix(self.dim, [k * int(i == j) for i in range(self.dim) for j in range(self.dim)])

    def draw(self, rng, bound):
        return Matrix(self.dim, [rng.randint(-bound, bound) for _ in range(self.dim ** 2)])

    def bits(self, x):
        return x.bits()

    def to_json(self, x):
        return [[format_fraction(v) for v in row] for row in x.rows()]

    def from_json(self, obj):
        if not isinstance(obj, list) or len(obj) != self.dim:
            raise StructureError(f"expected {self.dim}x{self.dim} matrix, got {obj!r}")
        rows = []
        for row in obj:
            if not isinstance(row, list) or len(row) != self.dim:
                raise StructureError(f"expected {self.dim}x{self.dim} matrix, got {obj!r}")
            rows.append([parse_fraction(v) for v in row])
        return Matrix.from_rows(rows)

    def format(self, x):
        if x is UNDEFINED:
            return "undefined"
        return "[" + ", ".join("[" + " ".join(str(v) for v in row) + "]" for row in x.rows()) + "]"


class TropicalSemiring(Ring):
    descriptor = RingDescriptor("tropical_max_plus")
    element_type = Tropical

    @property
    def zero(self):
        return Tropical(None)

    @property
    def one(self):
        return Tropical(0)

    def _invert(self, x):
        return None if x.value is None else Tropical(-x.value)

    def from_int(self, k):
        # k-fold tropical sum of the unit is the unit itself
        return Tropical(0) if k > 0 else Tropical(None)

    def draw(self, rng, bound):
        return Tropical(rng.randint(-bound, bound))

    def bits(self, x):
        if x.value is None:
            return 0
        return max(abs(x.value.numerator).bit_length(), x.value.denominator.bit_length())

    def to_json(self, x):
        return {"t": "-inf" if x.value is None else format_fraction(x.value)}

    def from_json(self, obj):
        if not isinstance(obj, dict) or set(obj) != {"t"}:
            raise StructureError(f"expected tropical {{'t': ...}}, got {obj!r}")
        if obj["t"] == "-inf":
            return Tropical(None)
        return Tropical(parse_fraction(obj["t"]))

    def format(self, x):
        if x is UNDEFINED:
            return "undefined"
        return "-inf" if x.value is None else str(x.value)


_RATIONALS = RationalField()
_TROPICAL = TropicalSemiring()


def make_ring(descriptor: RingDescriptor) -> Ring:
    if descriptor.kind == "exact_rational":
        return _RATIONALS
    if descriptor.kind == "rational_matrix":
        return MatrixRing(descriptor.dim)
    return _TROPICAL


def parse_ring(spec: str) -> Ring:
    """Parse a CLI ring spec: ``q``, ``mat:N`` or ``trop``."""
    spec = spec.strip()
    if spec == "q":
        return _RATIONALS
    if spec == "trop":
        return _TROPICAL
    m = re.fullmatch(r"mat:(\d+)", spec)
    if m and int(m.group(1)) >= 1:
        return MatrixRing(int(m.group(1)))
    raise StructureError(f"bad ring spec {spec!r} (expected q, mat:N or trop)")


def ring_of(x) -> Ring:
    if type(x) is Fraction:
        return _RATIONALS
    if type(x) is Matrix:
        return MatrixRing(x.dim)
    if type(x) is Tropical:
        return _TROPICAL
    raise StructureError(f"{x!r} is not a ring element")


# ---------------------------------------------------------------------------
# element-level operations


def _common_ring(x, y) -> Ring:
    rx, ry = ring_of(x), ring_of(y)
    if rx != ry:
        raise StructureError(f"ring mismatch: {rx!r} vs {ry!r}")
    return rx


def add(x, y):
    if x is UNDEFINED or y is UNDEFINED:
        return UNDEFINED
    return _common_ring(x, y).add(x, y)


def mul(x, y):
    if x is UNDEFINED or y is UNDEFINED:
        return UNDEFINED
    return _common_ring(x, y).mul(x, y)


def try_invert(x):
    if x is UNDEFINED:
        return UNDEFINED
    return ring_of(x).try_invert(x)


def random_invertible(descriptor: RingDescriptor, seed: int, entry_bound: int):
    """Deterministic invertible element drawn from ``SplitMix64(seed)``."""
    if entry_bound < 1:
        raise StructureError("entry_bound must be positive")
    ring = make_ring(descriptor)
    return ring.draw_invertible(SplitMix64(seed), entry_bound)


def check_inverse_laws(x, y):
    """inv(inv(x)) == x and inv(x*y) == inv(y)*inv(x)."""
    from .verdict import Verdict

    ring = _common_ring(x, y)
    ix, iy = ring.try_invert(x), ring.try_invert(y)
    if ix is UNDEFINED or iy is UNDEFINED:
        return Verdict.not_applicable("inverse_laws", "operand not invertible")
    failures = []
    iix = ring.try_invert(ix)
    if iix != x:
        failures.append(_witness(ring, "inv(inv(x)) = x", iix, x))
    ixy = ring.try_invert(ring.mul(x, y))
    rhs = ring.mul(iy, ix)
    if ixy != rhs:
        failures.append(_witness(ring, "inv(xy) = inv(y)inv(x)", ixy, rhs))
    return Verdict.from_failures("inverse_laws", failures)


def check_sum_inverse_identity(a, b):
    """a inv(a+b) b == b inv(a+b) a, and inv(inv(a)+inv(b)) == a inv(a+b) b."""
    from .verdict import Verdict

    ring = _common_ring(a, b)
    s_inv = ring.try_invert(ring.add(a, b))
    if s_inv is UNDEFINED:
        return Verdict.not_applicable("sum_inverse_identity", "a+b not invertible")
    failures = []
    left = ring.mul(ring.mul(a, s_inv), b)
    right = ring.mul(ring.mul(b, s_inv), a)
    if left != right:
        failures.append(_witness(ring, "a inv(a+b) b = b inv(a+b) a", left, right))
    ia, ib = ring.try_invert(a), ring.try_invert(b)
    if ia is not UNDEFINED and ib is not UNDEFINED:
        lhs = ring.try_invert(ring.add(ia, ib))
        if lhs != left:
            failures.append(_witness(ring, "inv(inv(a)+inv(b)) = a inv(a+b) b", lhs, left))
    return Verdict.from_failures("sum_inverse_identity", failures)


def _witness(ring, where, lhs, rhs) -> dict:
    return {
        "location": where,
        "lhs": "undefined" if lhs is UNDEFINED else ring.to_json(lhs),
        "rhs": "undefined" if rhs is UNDEFINED else ring.to_json(rhs),
    }
