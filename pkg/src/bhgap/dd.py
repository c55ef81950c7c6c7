"""Compensated double-double arithmetic for the extended-precision mode.

A DD holds an unevaluated sum hi + lo with |lo| <= ulp(hi)/2, giving ~31
significant digits.  CDD is the complex pair.  Only the operations the
LU / Parlett-Reid kernels need are provided.
"""
from __future__ import annotations

import math

_SPLITTER = 134217729.0  # 2^27 + 1


def _two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _quick_two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    return s, b - (s - a)


def _two_prod(a: float, b: float) -> tuple[float, float]:
    p = a * b
    ah = _SPLITTER * a
    ah = ah - (ah - a)
    al = a - ah
    bh = _SPLITTER * b
    bh = bh - (bh - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


class DD:
    __slots__ = ("hi", "lo")

    def __init__(self, hi: float = 0.0, lo: float = 0.0):
        self.hi = float(hi)
        self.lo = float(lo)

    def __repr__(self):
        return f"DD({self.hi!r}, {self.lo!r})"

    def __float__(self):
        return self.hi + self.lo

    def __neg__(self):
        return DD(-self.hi, -self.lo)

    def __abs__(self):
        return abs(self.hi + self.lo)

    def __add__(self, other: "DD") -> "DD":
        s, e = _two_sum(self.hi, other.hi)
        e += self.lo + other.lo
        s, e = _quick_two_sum(s, e)
        return DD(s, e)

    def __sub__(self, other: "DD") -> "DD":
        return self + (-other)

    def __mul__(self, other: "DD") -> "DD":
        p, e = _two_prod(self.hi, other.hi)
        e += self.hi * other.lo + self.lo * other.hi
        p, e = _quick_two_sum(p, e)
        return DD(p, e)

    def __truediv__(self, other: "DD") -> "DD":
        q1 = self.hi / other.hi
        r = self - other * DD(q1)
        q2 = (r.hi + r.lo) / (other.hi + other.lo)
        s, e = _quick_two_sum(q1, q2)
        return DD(s, e)

    def sqrt(self) -> "DD":
        if self.hi == 0.0:
            return DD(0.0)
        if self.hi < 0.0:
            raise ValueError("DD.sqrt of a negative number")
        x = math.sqrt(self.hi)
        # one Newton step in DD
        xd = DD(x)
        return (xd + self / xd) * DD(0.5)

    def is_zero(self) -> bool:
        return self.hi == 0.0 and self.lo == 0.0


class CDD:
    __slots__ = ("re", "im")

    def __init__(self, re: DD, im: DD):
        self.re = re
        self.im = im

    @staticmethod
    def from_complex(z: complex) -> "CDD":
        return CDD(DD(z.real), DD(z.imag))

    def to_complex(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __neg__(self):
        return CDD(-self.re, -self.im)

    def __abs__(self):
        return math.hypot(float(self.re), float(self.im))

    def __add__(self, other: "CDD") -> "CDD":
        return CDD(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "CDD") -> "CDD":
        return CDD(self.re - other.re, self.im - other.im)

    def __mul__(self, other: "CDD") -> "CDD":
        return CDD(self.re * other.re - self.im * other.im,
                   self.re * other.im + self.im * other.re)

    def __truediv__(self, other: "CDD") -> "CDD":
        # Smith's algorithm on DD components
        if abs(float(other.re)) >= abs(float(other.im)):
            r = other.im / other.re
            d = other.re + other.im * r
            return CDD((self.re + self.im * r) / d, (self.im - self.re * r) / d)
        r = other.re / other.im
        d = other.re * r + other.im
        return CDD((self.re * r + self.im) / d, (self.im * r - self.re) / d)

    def is_zero(self) -> bool:
        return self.re.is_zero() and self.im.is_zero()


def wrap(x, iscomplex: bool):
    return CDD.from_complex(complex(x)) if iscomplex else DD(float(x))


def unwrap(x):
    return x.to_complex() if isinstance(x, CDD) else float(x)


_LN2 = DD(0.6931471805599453, 2.3190468138462996e-17)


def dd_exp(x: DD) -> DD:
    """e^x for real DD via range reduction and the Taylor series."""
    xf = float(x)
    if xf < -700.0:
        return DD(0.0)
    if xf > 700.0:
        raise OverflowError("dd_exp overflow")
    k = int(round(xf / 0.6931471805599453))
    r = x - DD(float(k)) * _LN2
    term = DD(1.0)
    acc = DD(1.0)
    n = 0
    while n < 60:
        n += 1
        term = term * r / DD(float(n))
        acc = acc + term
        if abs(float(term)) <= 1e-35 * abs(float(acc)):
            break
    return acc * DD(math.ldexp(1.0, k))


def dd_ln(x: DD) -> DD:
    """ln x for positive DD: float seed plus one Newton correction."""
    xf = float(x)
    if xf <= 0.0:
        raise ValueError("dd_ln needs a positive argument")
    y0 = math.log(xf)
    corr = x * dd_exp(DD(-y0)) - DD(1.0)
    return DD(y0) + corr


def dd_pow(x: DD, p: float) -> DD:
    """x^p for positive DD base and float exponent."""
    if float(x) == 0.0:
        return DD(0.0)
    return dd_exp(dd_ln(x) * DD(p))
