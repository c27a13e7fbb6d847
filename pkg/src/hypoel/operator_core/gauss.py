"""Exact Gaussian rationals a + b*i with a, b in Q."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not an exact rational: {x!r}")


class GaussQ:
    """Element of Q(i).  Immutable and hashable."""

    __slots__ = ("re", "im", "_hash")

    def __init__(self, re=0, im=0):
        self.re = _frac(re)
        self.im = _frac(im)
        self._hash = None

    @classmethod
    def coerce(cls, x) -> "GaussQ":
        if isinstance(x, GaussQ):
            return x
        if isinstance(x, complex):
            raise TypeError("floating complex values are not exact")
        return cls(x, 0)

    # predicates
    def is_zero(self) -> bool:
        return not self.re and not self.im

    def is_real(self) -> bool:
        return not self.im

    def is_one(self) -> bool:
        return self.re == 1 and not self.im

    # arithmetic
    def __add__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return GaussQ(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return GaussQ(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return GaussQ(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        if not self.im and not o.im:
            return GaussQ(self.re * o.re, 0)
        return GaussQ(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __neg__(self):
        return GaussQ(-self.re, -self.im)

    def conjugate(self) -> "GaussQ":
        return GaussQ(self.re, -self.im)

    def norm2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def inverse(self) -> "GaussQ":
        n = self.norm2()
        if not n:
            raise ZeroDivisionError("GaussQ division by zero")
        return GaussQ(self.re / n, -self.im / n)

    def __truediv__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # comparisons / hashing
    def __eq__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.re, self.im)) if self.im else hash(self.re)
        return self._hash

    def __bool__(self):
        return not self.is_zero()

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussQ({self})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}*i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re} {sign} {abs(self.im)}*i"


def _coerce_or_none(x):
    if isinstance(x, GaussQ):
        return x
    if isinstance(x, (int, Fraction)):
        return GaussQ(x, 0)
    return None


ZERO = GaussQ(0)
ONE = GaussQ(1)
I = GaussQ(0, 1)
