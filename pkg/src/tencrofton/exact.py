"""Exact arithmetic in the ring Q[sqrt(pi)] restricted to single powers of pi.

Every constant in the Crofton formulae is a rational multiple of a half-integer
power of pi.  :class:`ExactScalar` stores such a value as ``coeff * pi**(m/2)``
with ``coeff`` a :class:`fractions.Fraction`.  Sums that mix different powers of
pi become :class:`ExactPolyPi`.

Half-integers are passed either as doubled integers (``two_a``) or as
``Fraction``/``int`` values whose double is an integer.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Mapping, Union

__all__ = [
    "ExactScalar",
    "ExactPolyPi",
    "DomainError",
    "as_half_integer",
    "binom",
    "gamma_half",
    "gamma",
    "rgamma",
    "rising_factorial",
    "rising",
    "omega",
    "kappa_ball",
    "lemma61",
    "lemma62",
    "lemma63",
    "lemma64",
]


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of an exact evaluator."""


RationalLike = Union[int, Fraction]


def _frac(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"expected a rational value, got {type(value).__name__}")


class ExactScalar:
    """The exact value ``coeff * pi**(pi_half_exponent / 2)``.

    Zero is always stored with exponent 0, so structural equality works.
    """

    __slots__ = ("coeff", "pi_half_exponent")

    def __init__(self, coeff: RationalLike = 0, pi_half_exponent: int = 0):
        coeff = _frac(coeff)
        if coeff == 0:
            pi_half_exponent = 0
        object.__setattr__(self, "coeff", coeff)
        object.__setattr__(self, "pi_half_exponent", int(pi_half_exponent))

    def __setattr__(self, name, value):
        raise AttributeError("ExactScalar is immutable")

    @classmethod
    def coerce(cls, value) -> "ExactScalar":
        if isinstance(value, ExactScalar):
            return value
        if isinstance(value, ExactPolyPi):
            return value.to_scalar()
        return cls(_frac(value), 0)

    @classmethod
    def pi_power(cls, half_exponent: int) -> "ExactScalar":
        return cls(1, half_exponent)

    def is_zero(self) -> bool:
        return self.coeff == 0

    def __mul__(self, other):
        if isinstance(other, ExactPolyPi):
            return ExactPolyPi.from_scalar(self) * other
        try:
            other = ExactScalar.coerce(other)
        except TypeError:
            return NotImplemented
        return ExactScalar(self.coeff * other.coeff, self.pi_half_exponent + other.pi_half_exponent)

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            other = ExactScalar.coerce(other)
        except TypeError:
            return NotImplemented
        if other.coeff == 0:
            raise ZeroDivisionError("division by exact zero")
        return ExactScalar(self.coeff / other.coeff, self.pi_half_exponent - other.pi_half_exponent)

    def __rtruediv__(self, other):
        return ExactScalar.coerce(other) / self

    def __neg__(self):
        return ExactScalar(-self.coeff, self.pi_half_exponent)

    def __pos__(self):
        return self

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int):
            return NotImplemented
        if exponent < 0:
            return ExactScalar(1) / (self ** (-exponent))
        return ExactScalar(self.coeff**exponent, self.pi_half_exponent * exponent)

    def __add__(self, other):
        if isinstance(other, ExactPolyPi):
            return ExactPolyPi.from_scalar(self) + other
        try:
            other = ExactScalar.coerce(other)
        except TypeError:
            return NotImplemented
        if other.coeff == 0:
            return self
        if self.coeff == 0:
            return other
        if self.pi_half_exponent == other.pi_half_exponent:
            return ExactScalar(self.coeff + other.coeff, self.pi_half_exponent)
        return ExactPolyPi.from_scalar(self) + ExactPolyPi.from_scalar(other)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-ExactScalar.coerce(other) if not isinstance(other, ExactPolyPi) else -other)

    def __rsub__(self, other):
        return (-self) + other

    def __eq__(self, other):
        if isinstance(other, ExactPolyPi):
            return ExactPolyPi.from_scalar(self) == other
        try:
            other = ExactScalar.coerce(other)
        except TypeError:
            return NotImplemented
        return self.coeff == other.coeff and self.pi_half_exponent == other.pi_half_exponent

    def __hash__(self):
        return hash((self.coeff, self.pi_half_exponent))

    def __float__(self):
        if self.coeff == 0:
            return 0.0
        return float(self.coeff) * math.pi ** (self.pi_half_exponent / 2)

    def __repr__(self):
        return f"ExactScalar({self.coeff!s}, pi_half_exponent={self.pi_half_exponent})"

    def __str__(self):
        if self.pi_half_exponent == 0:
            return str(self.coeff)
        return f"{self.coeff} * pi^({self.pi_half_exponent}/2)"

    def to_json(self) -> dict:
        return {"coeff": str(self.coeff), "pi_half_exponent": self.pi_half_exponent}


class ExactPolyPi:
    """A finite sum ``sum_m c_m * pi**(m/2)`` with rational ``c_m``."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[int, RationalLike] | None = None):
        clean = {}
        for exp, c in (terms or {}).items():
            c = _frac(c)
            if c != 0:
                clean[int(exp)] = c
        object.__setattr__(self, "_terms", dict(sorted(clean.items())))

    def __setattr__(self, name, value):
        raise AttributeError("ExactPolyPi is immutable")

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    @classmethod
    def from_scalar(cls, value) -> "ExactPolyPi":
        value = ExactScalar.coerce(value)
        return cls({value.pi_half_exponent: value.coeff})

    @classmethod
    def coerce(cls, value) -> "ExactPolyPi":
        if isinstance(value, ExactPolyPi):
            return value
        return cls.from_scalar(value)

    def is_zero(self) -> bool:
        return not self._terms

    def to_scalar(self) -> ExactScalar:
        if not self._terms:
            return ExactScalar(0)
        if len(self._terms) > 1:
            raise ValueError(f"{self} mixes several powers of pi")
        (exp, c), = self._terms.items()
        return ExactScalar(c, exp)

    def simplify(self):
        """Collapse to :class:`ExactScalar` when at most one term survives."""
        return self.to_scalar() if len(self._terms) <= 1 else self

    def __add__(self, other):
        other = ExactPolyPi.coerce(other)
        out = dict(self._terms)
        for exp, c in other._terms.items():
            out[exp] = out.get(exp, 0) + c
        return ExactPolyPi(out)

    __radd__ = __add__

    def __neg__(self):
        return ExactPolyPi({e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-ExactPolyPi.coerce(other))

    def __rsub__(self, other):
        return ExactPolyPi.coerce(other) - self

    def __mul__(self, other):
        other = ExactPolyPi.coerce(other)
        out: dict[int, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                out[e1 + e2] = out.get(e1 + e2, 0) + c1 * c2
        return ExactPolyPi(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        try:
            other = ExactPolyPi.coerce(other)
        except TypeError:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(tuple(self._terms.items()))

    def __float__(self):
        return sum(float(ExactScalar(c, e)) for e, c in self._terms.items())

    def __repr__(self):
        return f"ExactPolyPi({self._terms!r})"

    def __str__(self):
        if not self._terms:
            return "0"
        return " + ".join(str(ExactScalar(c, e)) for e, c in self._terms.items())


def exact_sum(values: Iterable) -> ExactScalar | ExactPolyPi:
    """Sum exact values, collapsing to a scalar when the pi powers agree."""
    acc: dict[int, Fraction] = {}
    for v in values:
        if isinstance(v, ExactPolyPi):
            items = v._terms.items()
        else:
            v = ExactScalar.coerce(v)
            items = ((v.pi_half_exponent, v.coeff),)
        for exp, c in items:
            acc[exp] = acc.get(exp, 0) + c
    return ExactPolyPi(acc).simplify()


def as_half_integer(x) -> Fraction:
    """Return ``x`` as a Fraction, checking that ``2x`` is an integer."""
    x = _frac(x)
    if (2 * x).denominator != 1:
        raise DomainError(f"{x} is not a half-integer")
    return x


def binom(n: int, k: int) -> int:
    """Binomial coefficient, zero outside ``0 <= k <= n``."""
    if k < 0 or n < 0 or k > n:
        return 0
    return math.comb(n, k)


@lru_cache(maxsize=None)
def gamma_half(two_a: int) -> ExactScalar:
    """Gamma(two_a / 2) for a positive doubled argument."""
    two_a = int(two_a)
    if two_a <= 0:
        raise DomainError(f"Gamma({Fraction(two_a, 2)}) is a pole or outside the supported range")
    if two_a % 2 == 0:
        return ExactScalar(math.factorial(two_a // 2 - 1), 0)
    m = (two_a - 1) // 2
    return ExactScalar(Fraction(math.factorial(2 * m), 4**m * math.factorial(m)), 1)


@lru_cache(maxsize=4096)
def gamma(x) -> ExactScalar:
    """Gamma at a positive half-integer."""
    x = as_half_integer(x)
    return gamma_half(int(2 * x))


def rgamma(x) -> ExactScalar:
    """1/Gamma(x), with the convention 1/Gamma(-m) = 0 at the poles."""
    x = as_half_integer(x)
    if x <= 0 and x.denominator == 1:
        return ExactScalar(0)
    return ExactScalar(1) / gamma(x)


def rising_factorial(two_a: int, q: int) -> ExactScalar:
    """The product a (a+1) ... (a+q-1) for a = two_a / 2; empty product is 1."""
    return rising(Fraction(int(two_a), 2), q)


def rising(a, q: int) -> ExactScalar:
    """Rising factorial for a rational ``a`` (any sign)."""
    if q < 0:
        raise DomainError("rising factorial needs q >= 0")
    a = _frac(a)
    prod = Fraction(1)
    for i in range(q):
        prod *= a + i
    return ExactScalar(prod, 0)


def omega(m: int) -> ExactScalar:
    """Surface area of the unit sphere in R^m, 2 pi^(m/2) / Gamma(m/2)."""
    if m < 1:
        raise DomainError("omega needs m >= 1")
    return 2 * ExactScalar.pi_power(m) / gamma_half(m)


def kappa_ball(m: int) -> ExactScalar:
    """Volume of the unit ball in R^m."""
    if m < 0:
        raise DomainError("kappa needs m >= 0")
    return ExactScalar.pi_power(m) / gamma_half(m + 2)


def _require_positive(**values):
    for name, v in values.items():
        if v <= 0:
            raise DomainError(f"{name} = {v} must be positive")


@lru_cache(maxsize=None)
def _gamma_parts(two_a: int) -> tuple[int, int, int]:
    g = gamma_half(two_a)
    return g.coeff.numerator, g.coeff.denominator, g.pi_half_exponent


class _TermSum:
    """Accumulate signed Gamma quotients with integer arithmetic.

    Gamma arguments are given doubled.  Each summand becomes a single integer
    fraction, and only the running totals are :class:`Fraction` objects.
    """

    def __init__(self):
        self.total: dict[int, tuple[int, int]] = {}

    def add(self, num: int, den: int, upper: tuple = (), lower: tuple = ()):
        exp = 0
        for two_x in upper:
            gn, gd, ge = _gamma_parts(two_x)
            num *= gn
            den *= gd
            exp += ge
        for two_x in lower:
            gn, gd, ge = _gamma_parts(two_x)
            num *= gd
            den *= gn
            exp -= ge
        tn, td = self.total.get(exp, (0, 1))
        self.total[exp] = (tn * den + num * td, td * den)

    def value(self):
        return ExactPolyPi({e: Fraction(n, d) for e, (n, d) in self.total.items()}).simplify()


def _doubled(*values) -> list[int]:
    return [int(2 * as_half_integer(v)) for v in values]


def lemma61(q: int, a, b):
    """Alternating binomial sum of Gamma ratios against its closed form."""
    a, b = as_half_integer(a), as_half_integer(b)
    _require_positive(a=a, b=b)
    if q < 0:
        raise DomainError("q must be non-negative")
    A, B = _doubled(a, b)
    acc = _TermSum()
    for y in range(q + 1):
        acc.add((-1) ** y * binom(q, y), 1, (A + 2 * y,), (B + 2 * y,))
    rhs = _TermSum()
    rhs.add(1, 1, (A,), (B + 2 * q,))
    return acc.value(), rhs.value() * rising(b - a, q)


def lemma62(a: int):
    """sum_q (-1)^q / (Gamma(a-q+1/2) q!) against (-1)^a / (sqrt(pi) (1-2a) a!)."""
    if a < 0:
        raise DomainError("a must be non-negative")
    acc = _TermSum()
    for q in range(a + 1):
        acc.add((-1) ** q, math.factorial(q), (), (2 * (a - q) + 1,))
    rhs = ExactScalar(Fraction((-1) ** a, (1 - 2 * a) * math.factorial(a)), -1)
    return acc.value(), rhs


def lemma63(a, b, c, z: int):
    """Alternating sum of four-Gamma quotients against its factorised form.

    Denominator Gammas may sit at poles (non-positive integers); those terms
    vanish.  Negative non-integer arguments are rejected.
    """
    a, b, c = (as_half_integer(v) for v in (a, b, c))
    if not (0 <= z < a):
        raise DomainError("need a > z >= 0")
    _require_positive(b=b)
    A, B, C = _doubled(a, b, c)
    lower_args = [x for j in range(z + 1) for x in (C - 2 * j, A + B - C - 2 * j + 2)]
    if any(x <= 0 and x % 2 for x in lower_args):
        raise DomainError("denominator Gamma arguments must be positive or poles")
    acc = _TermSum()
    for j in range(z + 1):
        if C - 2 * j <= 0 or A + B - C - 2 * j + 2 <= 0:
            continue  # 1/Gamma at a pole
        acc.add(
            (-1) ** j * binom(z, j), 1,
            (A - 2 * j, B + 2 * (z - j)),
            (C - 2 * j, A + B - C - 2 * j + 2),
        )
    if A + B - C + 2 <= 0 or C <= 0:
        return acc.value(), ExactScalar(0)
    rhs = _TermSum()
    rhs.add((-1) ** z, 1, (A - 2 * z, B), (A + B - C + 2, C))
    rhs = rhs.value() * rising(a - c + 1 - z, z) * rising(c - b - z, z)
    return acc.value(), rhs


def lemma64(a, b, t: int):
    """Alternating sum with a 1/(b+j) weight against its closed form."""
    a, b = as_half_integer(a), as_half_integer(b)
    _require_positive(a=a, b=b)
    if t < 1:
        raise DomainError("t must be at least 1")
    A, B = _doubled(a, b)
    acc = _TermSum()
    for j in range(t + 1):
        # 1/(b+j) = 2/(B+2j)
        acc.add((-1) ** j * binom(t, j) * 2, B + 2 * j, (A + 2 * (t + j),), (A + 2 + 2 * j,))
    rhs = _TermSum()
    rhs.add(math.factorial(t), 1, (B,), (B + 2 * t + 2,))
    return acc.value(), rising(a - b + 1, t - 1) * rhs.value()
