"""Exact rational scalar kit: complex rationals and certified one-sided bounds.

Everything that feeds a certificate is computed in fractions.Fraction with
explicit rounding direction.  Irrational quantities (moduli, exp, ln, roots)
are only ever produced as one-sided rational bounds; the caller states which
side it needs and the bound is sound by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Rat = Union[int, Fraction]

# Default scaling precision (bits) for one-sided root/modulus bounds.
DEFAULT_BITS = 64


class CertificateError(ValueError):
    """A certified inequality could not be established."""


def parse_fraction(text: str) -> Fraction:
    """Parse 'p/q' or an integer literal.  Decimal floats are rejected."""
    s = text.strip()
    if "/" in s:
        num, _, den = s.partition("/")
        return Fraction(int(num), int(den))
    # int() rejects '0.1', '0.1.2', '1e-3' etc.
    return Fraction(int(s))


def format_fraction(x: Rat) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


def isqrt_ceil(n: int) -> int:
    r = math.isqrt(n)
    return r if r * r == n else r + 1


def sqrt_upper(x: Rat, bits: int = DEFAULT_BITS) -> Fraction:
    """Rational u with u >= sqrt(x); exact on perfect squares."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("sqrt of negative rational")
    p, q = x.numerator, x.denominator
    scale = 1 << bits
    return Fraction(isqrt_ceil(p * q * scale * scale), q * scale)


def sqrt_lower(x: Rat, bits: int = DEFAULT_BITS) -> Fraction:
    """Rational l with 0 <= l <= sqrt(x); exact on perfect squares."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("sqrt of negative rational")
    p, q = x.numerator, x.denominator
    scale = 1 << bits
    return Fraction(math.isqrt(p * q * scale * scale), q * scale)


def _iroot_floor(n: int, k: int) -> int:
    """Largest r with r**k <= n (n >= 0, k >= 1)."""
    if n < 0:
        raise ValueError("negative radicand")
    if n in (0, 1) or k == 1:
        return n
    r = int(round(n ** (1.0 / k))) if n.bit_length() < 512 else 1 << (n.bit_length() // k + 1)
    # settle by exact integer steps
    while r > 0 and r**k > n:
        r -= max(1, r >> 10)
    while (r + 1) ** k <= n:
        r += max(1, r >> 10)
    while r**k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


def pow_frac_lower(x: Rat, p: int, q: int, bits: int = DEFAULT_BITS) -> Fraction:
    """Rational l <= x**(p/q) for x >= 0, p >= 0, q >= 1."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("negative base")
    if q == 1:
        return x**p
    y = x**p
    scale = 1 << (bits * q)
    num = (y.numerator * scale) // y.denominator  # floor(y * 2^(bits*q))
    return Fraction(_iroot_floor(num, q), 1 << bits)


def pow_frac_upper(x: Rat, p: int, q: int, bits: int = DEFAULT_BITS) -> Fraction:
    """Rational u >= x**(p/q) for x >= 0, p >= 0, q >= 1."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("negative base")
    if q == 1:
        return x**p
    y = x**p
    scale = 1 << (bits * q)
    num = -((-y.numerator * scale) // y.denominator)  # ceil
    r = _iroot_floor(num, q)
    if r**q < num:
        r += 1
    return Fraction(r, 1 << bits)


# ---------------------------------------------------------------------------
# exp / ln with one-sided rational bounds
# ---------------------------------------------------------------------------

_E_TERMS = 40  # tail 1/(40! * 40) ~ 3e-50


def _e_bounds() -> tuple[Fraction, Fraction]:
    s = Fraction(0)
    f = 1
    for k in range(_E_TERMS + 1):
        if k > 0:
            f *= k
        s += Fraction(1, f)
    return s, s + Fraction(1, f * _E_TERMS)


_E_LO, _E_HI = _e_bounds()


def exp_lower(x: Rat) -> Fraction:
    """Rational l <= exp(x) for x >= 0."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("exp_lower defined for x >= 0")
    m = int(x)  # floor
    f = x - m
    s = Fraction(1)
    t = Fraction(1)
    for k in range(1, 24):
        t = t * f / k
        s += t
    return (_E_LO**m) * s


def exp_upper(x: Rat) -> Fraction:
    """Rational u >= exp(x) for x >= 0."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("exp_upper defined for x >= 0")
    m = int(x)
    f = x - m
    n = 24
    s = Fraction(1)
    t = Fraction(1)
    for k in range(1, n + 1):
        t = t * f / k
        s += t
    # geometric tail bound: next term * 1/(1 - f/(n+2)), f < 1
    tail = t * f / (n + 1) / (1 - f / (n + 2)) if f > 0 else Fraction(0)
    return (_E_HI**m) * (s + tail)


def _atanh_bounds(u: Fraction, terms: int = 40) -> tuple[Fraction, Fraction]:
    """Bounds for atanh(u), 0 <= u < 1."""
    s = Fraction(0)
    p = u
    for k in range(terms):
        s += p / (2 * k + 1)
        p *= u * u
    tail = p / (2 * terms + 1) / (1 - u * u)
    return s, s + tail


_LN2_LO, _LN2_HI = (2 * b for b in _atanh_bounds(Fraction(1, 3), 60))


def ln_bounds(x: Rat) -> tuple[Fraction, Fraction]:
    """(l, u) with l <= ln(x) <= u, for rational x >= 1."""
    x = Fraction(x)
    if x < 1:
        raise ValueError("ln_bounds defined for x >= 1")
    m = 0
    while x >= 2:
        x /= 2
        m += 1
    lo, hi = _atanh_bounds((x - 1) / (x + 1), 30)
    return m * _LN2_LO + 2 * lo, m * _LN2_HI + 2 * hi


# ---------------------------------------------------------------------------
# complex rationals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QC:
    """Complex number with exact rational real and imaginary parts."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    def __add__(self, other: "QC") -> "QC":
        return QC(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "QC") -> "QC":
        return QC(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "QC":
        return QC(-self.re, -self.im)

    def __mul__(self, other):
        if isinstance(other, QC):
            return QC(self.re * other.re - self.im * other.im,
                      self.re * other.im + self.im * other.re)
        return QC(self.re * other, self.im * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, QC):
            d = other.abs2()
            if d == 0:
                raise ZeroDivisionError("division by zero complex rational")
            return self * other.conj() * (1 / d)
        return QC(self.re / other, self.im / other)

    def conj(self) -> "QC":
        return QC(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def pow(self, k: int) -> "QC":
        if k < 0:
            raise ValueError("negative power")
        out = QC(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def to_complex(self) -> complex:
        return complex(self.re, self.im)

    def __str__(self):
        return f"({format_fraction(self.re)}, {format_fraction(self.im)})"


QC_ZERO = QC()
QC_ONE = QC(Fraction(1))


def qc(re: Rat, im: Rat = 0) -> QC:
    return QC(Fraction(re), Fraction(im))


def abs_upper(z: QC, bits: int = DEFAULT_BITS) -> Fraction:
    """Certified upper bound on |z|; exact when |z| is rational at scale."""
    return sqrt_upper(z.abs2(), bits)


def abs_lower(z: QC, bits: int = DEFAULT_BITS) -> Fraction:
    return sqrt_lower(z.abs2(), bits)


def vec_norm2_upper(values, bits: int = DEFAULT_BITS) -> Fraction:
    """Upper bound on the Euclidean norm of a list of Fractions (reals)."""
    return sqrt_upper(sum(Fraction(v) ** 2 for v in values), bits)


def vec_norm2_lower(values, bits: int = DEFAULT_BITS) -> Fraction:
    return sqrt_lower(sum(Fraction(v) ** 2 for v in values), bits)
