"""Exact numbers: half-integers and finite sums of rational multiples of
square roots.

Every coupling coefficient of SU(2) is of the form ``c * sqrt(r)`` with
``c`` and ``r`` rational, and sums of such values (9-j symbols, adapted
coefficients) stay inside the vector space spanned over Q by square roots
of square-free integers.  Because those square roots are linearly
independent over Q, a sum is zero exactly when every coefficient is zero,
which is what makes exact identity tests possible.

Radicands are factored by trial division with primes below 10**6.  A
cofactor left after trial division that is below 10**18 has at most two
prime factors, so it is either a perfect square (detected with ``isqrt``)
or square-free; larger cofactors raise :class:`InvalidInputError`.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

import numpy as np

from .errors import InvalidInputError

_TRIAL_BOUND = 10**6
_COFACTOR_BOUND = 10**18
_primes: list[int] | None = None


def _prime_list() -> list[int]:
    global _primes
    if _primes is None:
        sieve = np.ones(_TRIAL_BOUND + 1, dtype=bool)
        sieve[:2] = False
        for p in range(2, int(_TRIAL_BOUND**0.5) + 1):
            if sieve[p]:
                sieve[p * p :: p] = False
        _primes = np.flatnonzero(sieve).tolist()
    return _primes


@lru_cache(maxsize=65536)
def _split_square(n: int) -> tuple[int, int]:
    """Return (s, f) with n = s*s*f and f square-free, for n >= 1."""
    if n < 1:
        raise InvalidInputError("radicand must be positive")
    s, f = 1, 1
    root = math.isqrt(n)
    if root * root == n:
        return root, 1
    for p in _prime_list():
        if p * p > n:
            break
        if n % p:
            continue
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        s *= p ** (e // 2)
        if e % 2:
            f *= p
    if n > 1:
        root = math.isqrt(n)
        if root * root == n:
            s *= root
        elif n < _COFACTOR_BOUND:
            f *= n
        else:
            raise InvalidInputError(f"cannot certify square-free part of {n}")
    return s, f


def canonicalize(num: int, den: int = 1) -> tuple[Fraction, Fraction]:
    """Split ``num/den`` into a square-free radicand and a rational factor.

    Returns ``(r, c)`` with ``|num/den| = c**2 * r``; numerator and
    denominator of ``r`` are square-free and coprime, and ``c`` carries the
    sign of ``num/den`` (signed-square convention).

    >>> canonicalize(45, 4)
    (Fraction(5, 1), Fraction(3, 2))
    """
    if den == 0:
        raise InvalidInputError("zero denominator")
    q = Fraction(num, den)
    if q == 0:
        return Fraction(1), Fraction(0)
    sign = 1 if q > 0 else -1
    sa, fa = _split_square(abs(q.numerator))
    sb, fb = _split_square(q.denominator)
    return Fraction(fa, fb), sign * Fraction(sa, sb)


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    raise TypeError(f"not a rational: {x!r}")


class HalfInt:
    """An integer or half-odd-integer, stored as twice its value."""

    __slots__ = ("twice",)

    def __init__(self, twice: int):
        if isinstance(twice, bool) or not isinstance(twice, (int, np.integer)):
            raise InvalidInputError("HalfInt takes the twice-value as an integer; use HalfInt.of()")
        object.__setattr__(self, "twice", int(twice))

    def __setattr__(self, name, value):
        raise AttributeError("HalfInt is immutable")

    @classmethod
    def of(cls, x) -> "HalfInt":
        """Build from an int, Fraction, float, HalfInt or a string like '3/2' or '1.5'."""
        if isinstance(x, HalfInt):
            return x
        if isinstance(x, str):
            s = x.strip()
            try:
                q = Fraction(s)
            except ValueError as exc:
                raise InvalidInputError(f"not a half-integer: {x!r}") from exc
        elif isinstance(x, (float, np.floating)):
            if not math.isfinite(x) or (2 * x) != round(2 * x):
                raise InvalidInputError(f"not a half-integer: {x!r}")
            q = Fraction(round(2 * x), 2)
        elif isinstance(x, (int, np.integer, Rational)):
            q = Fraction(int(x)) if isinstance(x, np.integer) else Fraction(x)
        else:
            raise InvalidInputError(f"not a half-integer: {x!r}")
        t = 2 * q
        if t.denominator != 1:
            raise InvalidInputError(f"not a half-integer: {x!r}")
        return cls(int(t))

    @property
    def value(self) -> Fraction:
        return Fraction(self.twice, 2)

    @property
    def is_integer(self) -> bool:
        return self.twice % 2 == 0

    def projections(self) -> list["HalfInt"]:
        """m = j, j-1, ..., -j."""
        if self.twice < 0:
            raise InvalidInputError("negative angular momentum")
        return [HalfInt(t) for t in range(self.twice, -self.twice - 1, -2)]

    def __float__(self) -> float:
        return self.twice / 2

    def __int__(self) -> int:
        if self.twice % 2:
            raise InvalidInputError(f"{self} is not an integer")
        return self.twice // 2

    def __neg__(self) -> "HalfInt":
        return HalfInt(-self.twice)

    def __abs__(self) -> "HalfInt":
        return HalfInt(abs(self.twice))

    def __add__(self, other) -> "HalfInt":
        return HalfInt(self.twice + HalfInt.of(other).twice)

    __radd__ = __add__

    def __sub__(self, other) -> "HalfInt":
        return HalfInt(self.twice - HalfInt.of(other).twice)

    def __rsub__(self, other) -> "HalfInt":
        return HalfInt(HalfInt.of(other).twice - self.twice)

    def _cmp_value(self, other):
        if isinstance(other, HalfInt):
            return other.value
        if isinstance(other, (int, Fraction, np.integer)):
            return Fraction(int(other)) if isinstance(other, np.integer) else Fraction(other)
        if isinstance(other, float):
            return Fraction(other)
        return NotImplemented

    def __eq__(self, other):
        v = self._cmp_value(other)
        return NotImplemented if v is NotImplemented else self.value == v

    def __lt__(self, other):
        v = self._cmp_value(other)
        return NotImplemented if v is NotImplemented else self.value < v

    def __le__(self, other):
        v = self._cmp_value(other)
        return NotImplemented if v is NotImplemented else self.value <= v

    def __gt__(self, other):
        v = self._cmp_value(other)
        return NotImplemented if v is NotImplemented else self.value > v

    def __ge__(self, other):
        v = self._cmp_value(other)
        return NotImplemented if v is NotImplemented else self.value >= v

    def __hash__(self):
        return hash(self.value)

    def __str__(self):
        return str(self.twice // 2) if self.twice % 2 == 0 else f"{self.twice}/2"

    def __repr__(self):
        return f"HalfInt({self})"


def twice(x) -> int:
    """Twice-value of anything accepted by :meth:`HalfInt.of`."""
    return HalfInt.of(x).twice


class SqrtRationalSum:
    """Finite sum ``sum_r c_r * sqrt(r)`` with rational ``c_r``.

    Radicands are kept as square-free positive integers (``sqrt(1/2)`` is
    stored as ``(1/2)*sqrt(2)``), which makes the representation unique.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms=None):
        clean: dict[int, Fraction] = {}
        if terms:
            for r, c in dict(terms).items():
                c = _as_fraction(c)
                if c == 0:
                    continue
                r = _as_fraction(r)
                if r <= 0:
                    raise InvalidInputError("radicands must be positive")
                key, scale = _integer_radicand(r)
                clean[key] = clean.get(key, Fraction(0)) + c * scale
            clean = {k: v for k, v in clean.items() if v != 0}
        object.__setattr__(self, "_terms", dict(sorted(clean.items())))
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("SqrtRationalSum is immutable")

    @classmethod
    def _raw(cls, terms: dict[int, Fraction]) -> "SqrtRationalSum":
        obj = object.__new__(cls)
        object.__setattr__(obj, "_terms", dict(sorted((k, v) for k, v in terms.items() if v != 0)))
        object.__setattr__(obj, "_hash", None)
        return obj

    @classmethod
    def zero(cls) -> "SqrtRationalSum":
        return cls._raw({})

    @classmethod
    def rational(cls, q) -> "SqrtRationalSum":
        return cls._raw({1: _as_fraction(q)})

    @classmethod
    def sqrt(cls, q) -> "SqrtRationalSum":
        """Signed square root: ``sign(q) * sqrt(|q|)``."""
        q = _as_fraction(q)
        r, c = canonicalize(q.numerator, q.denominator)
        return cls._raw({}) if c == 0 else cls._raw({r.numerator * r.denominator: c / r.denominator})

    @classmethod
    def coerce(cls, x) -> "SqrtRationalSum":
        if isinstance(x, SqrtRationalSum):
            return x
        return cls.rational(x)

    @property
    def terms(self) -> dict[int, Fraction]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_rational(self) -> bool:
        return all(k == 1 for k in self._terms)

    def is_single_term(self) -> bool:
        return len(self._terms) <= 1

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise InvalidInputError(f"{self} is irrational")
        return self._terms.get(1, Fraction(0))

    def signed_square(self) -> Fraction:
        """For a single-term value x return sign(x) * x**2 (exact)."""
        if not self.is_single_term():
            raise InvalidInputError("signed_square needs a single-term value")
        if not self._terms:
            return Fraction(0)
        (r, c), = self._terms.items()
        return (1 if c > 0 else -1) * c * c * r

    def __bool__(self):
        return bool(self._terms)

    def __float__(self):
        return self.to_float()

    def to_float(self) -> float:
        total = 0.0
        for r, c in self._terms.items():
            total += float(c) * (math.sqrt(r) if r != 1 else 1.0)
        return total

    def __neg__(self):
        return SqrtRationalSum._raw({k: -v for k, v in self._terms.items()})

    def __add__(self, other):
        try:
            other = SqrtRationalSum.coerce(other)
        except TypeError:
            return NotImplemented
        out = dict(self._terms)
        for k, v in other._terms.items():
            out[k] = out.get(k, Fraction(0)) + v
        return SqrtRationalSum._raw(out)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            other = SqrtRationalSum.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return SqrtRationalSum.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, ExactComplex):
            return NotImplemented
        try:
            other = SqrtRationalSum.coerce(other)
        except TypeError:
            return NotImplemented
        out: dict[int, Fraction] = {}
        for a, ca in self._terms.items():
            for b, cb in other._terms.items():
                g = math.gcd(a, b)
                key = (a // g) * (b // g)
                out[key] = out.get(key, Fraction(0)) + ca * cb * g
        return SqrtRationalSum._raw(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, ExactComplex):
            return NotImplemented
        try:
            other = SqrtRationalSum.coerce(other)
        except TypeError:
            return NotImplemented
        if not other._terms:
            raise ZeroDivisionError("division by exact zero")
        if not other.is_single_term():
            raise InvalidInputError("division only by single-term values")
        (r, c), = other._terms.items()
        # 1/(c sqrt r) = sqrt(r)/(c r)
        return self * SqrtRationalSum._raw({r: 1 / (c * r)})

    def __rtruediv__(self, other):
        return SqrtRationalSum.coerce(other) / self

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = SqrtRationalSum.rational(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, ExactComplex):
            return other == self
        try:
            other = SqrtRationalSum.coerce(other)
        except TypeError:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            h = hash(self._terms.get(1, Fraction(0))) if self.is_rational() else hash(tuple(self._terms.items()))
            object.__setattr__(self, "_hash", h)
        return self._hash

    def __repr__(self):
        return f"SqrtRationalSum({self})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for r, c in self._terms.items():
            parts.append(str(c) if r == 1 else f"{c}*sqrt({r})")
        return " + ".join(parts).replace("+ -", "- ")

    def to_json(self) -> list[dict]:
        return [
            {"coeff_num": c.numerator, "coeff_den": c.denominator, "rad_num": r, "rad_den": 1}
            for r, c in self._terms.items()
        ]

    @classmethod
    def from_json(cls, data) -> "SqrtRationalSum":
        total = cls.zero()
        try:
            for t in data:
                rad = Fraction(t["rad_num"], t["rad_den"])
                total = total + cls({rad: Fraction(t["coeff_num"], t["coeff_den"])})
        except (KeyError, TypeError, ZeroDivisionError) as exc:
            raise InvalidInputError(f"malformed SqrtRationalSum JSON: {data!r}") from exc
        return total


def _integer_radicand(r: Fraction) -> tuple[int, Fraction]:
    """Write sqrt(r) = scale * sqrt(key) with key a square-free integer."""
    rad, c = canonicalize(r.numerator, r.denominator)
    return rad.numerator * rad.denominator, c / rad.denominator


class ExactComplex:
    """Complex number with :class:`SqrtRationalSum` real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", SqrtRationalSum.coerce(re))
        object.__setattr__(self, "im", SqrtRationalSum.coerce(im))

    def __setattr__(self, name, value):
        raise AttributeError("ExactComplex is immutable")

    @classmethod
    def coerce(cls, x) -> "ExactComplex":
        if isinstance(x, ExactComplex):
            return x
        return cls(SqrtRationalSum.coerce(x))

    def conjugate(self) -> "ExactComplex":
        return ExactComplex(self.re, -self.im)

    def abs2(self) -> SqrtRationalSum:
        return self.re * self.re + self.im * self.im

    def is_zero(self) -> bool:
        return self.re.is_zero() and self.im.is_zero()

    def is_real(self) -> bool:
        return self.im.is_zero()

    def __bool__(self):
        return not self.is_zero()

    def __complex__(self):
        return complex(self.re.to_float(), self.im.to_float())

    def to_complex(self) -> complex:
        return complex(self)

    def __neg__(self):
        return ExactComplex(-self.re, -self.im)

    def __add__(self, other):
        try:
            other = ExactComplex.coerce(other)
        except TypeError:
            return NotImplemented
        return ExactComplex(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            other = ExactComplex.coerce(other)
        except TypeError:
            return NotImplemented
        return ExactComplex(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return ExactComplex.coerce(other) - self

    def __mul__(self, other):
        try:
            other = ExactComplex.coerce(other)
        except TypeError:
            return NotImplemented
        return ExactComplex(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, ExactComplex):
            if not other.im.is_zero():
                raise InvalidInputError("division only by real values")
            other = other.re
        return ExactComplex(self.re / other, self.im / other)

    def __eq__(self, other):
        try:
            other = ExactComplex.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash(self.re) if self.im.is_zero() else hash((self.re, self.im))

    def __repr__(self):
        return f"ExactComplex({self})"

    def __str__(self):
        if self.im.is_zero():
            return str(self.re)
        if self.re.is_zero():
            return f"i*({self.im})"
        return f"({self.re}) + i*({self.im})"

    def to_json(self) -> dict:
        return {"re": self.re.to_json(), "im": self.im.to_json()}

    @classmethod
    def from_json(cls, data) -> "ExactComplex":
        try:
            return cls(SqrtRationalSum.from_json(data["re"]), SqrtRationalSum.from_json(data["im"]))
        except (KeyError, TypeError) as exc:
            raise InvalidInputError(f"malformed ExactComplex JSON: {data!r}") from exc


I = ExactComplex(0, 1)


def snap_real(x: float, tol: float = 1e-9, max_den: int = 10**4) -> SqrtRationalSum | None:
    """Recognise ``x`` as ``sign * sqrt(p/q)`` with ``q <= max_den``."""
    if abs(x) < tol:
        return SqrtRationalSum.zero()
    sq = Fraction(x * x).limit_denominator(max_den)
    if sq == 0 or abs(float(sq) - x * x) > tol:
        return None
    return SqrtRationalSum.sqrt(sq if x > 0 else -sq)


def snap_complex(z: complex, tol: float = 1e-9, max_den: int = 10**4) -> ExactComplex | None:
    """Snap real and imaginary parts separately; ``None`` if either fails."""
    re = snap_real(z.real, tol, max_den)
    im = snap_real(z.imag, tol, max_den)
    if re is None or im is None:
        return None
    return ExactComplex(re, im)
