"""Rational interval arithmetic and real root isolation for integer polynomials."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

__all__ = ["Interval", "sturm_sequence", "count_roots", "isolate_real_roots", "refine_root"]


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi

    def __contains__(self, x) -> bool:
        return self.contains(x)

    def subset_of(self, other: "Interval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def __add__(self, other):
        if isinstance(other, Interval):
            return Interval(self.lo + other.lo, self.hi + other.hi)
        return Interval(self.lo + other, self.hi + other)

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Interval):
            p = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
            return Interval(min(p), max(p))
        other = Fraction(other)
        if other >= 0:
            return Interval(self.lo * other, self.hi * other)
        return Interval(self.hi * other, self.lo * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Interval):
            if other.lo <= 0 <= other.hi:
                raise ZeroDivisionError("interval divisor contains zero")
            return self * Interval(1 / other.hi, 1 / other.lo)
        return self * (1 / Fraction(other))

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Interval(0, max(-self.lo, self.hi))

    def __float__(self):
        return float(self.mid)


def _peval(coeffs: Sequence, x):
    acc = 0
    for c in coeffs:
        acc = acc * x + c
    return acc


def _prem(f: list[Fraction], g: list[Fraction]) -> list[Fraction]:
    f = list(f)
    while len(f) >= len(g) and any(f):
        k = f[0] / g[0]
        for i in range(len(g)):
            f[i] -= k * g[i]
        f.pop(0)
    while f and f[0] == 0:
        f.pop(0)
    return f


def sturm_sequence(coeffs: Sequence[int]) -> list[list[Fraction]]:
    """Sturm chain f, f', -rem(f, f'), ... (degree-descending coefficient lists)."""
    f = [Fraction(c) for c in coeffs]
    n = len(f) - 1
    df = [f[i] * (n - i) for i in range(n)]
    seq = [f, df]
    while len(seq[-1]) > 1:
        r = _prem(seq[-2], seq[-1])
        if not r:
            break
        seq.append([-x for x in r])
    return seq


def _variations(seq, x) -> int:
    signs = [v for v in (_peval(p, x) for p in seq) if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if (a > 0) != (b > 0))


def count_roots(seq, lo, hi) -> int:
    """Number of distinct real roots in (lo, hi] for a square-free polynomial."""
    return _variations(seq, lo) - _variations(seq, hi)


def isolate_real_roots(coeffs: Sequence[int]) -> list[tuple[Fraction, Fraction]]:
    """Disjoint isolating intervals with dyadic endpoints, ordered by decreasing root.

    Endpoints are never roots, and each interval has a sign change of f.
    """
    f = [Fraction(c) for c in coeffs]
    if f[0] != 1:
        f = [c / f[0] for c in f]
    seq = sturm_sequence(coeffs)
    bound = 1 + max(abs(c) for c in f[1:])
    pw = 1
    while pw < bound:
        pw *= 2
    found: list[tuple[Fraction, Fraction]] = []
    stack = [(Fraction(-pw), Fraction(pw))]
    while stack:
        lo, hi = stack.pop()
        n = count_roots(seq, lo, hi)
        if n == 0:
            continue
        if n == 1 and _peval(f, lo) != 0 and _peval(f, hi) != 0:
            found.append((lo, hi))
            continue
        if hi - lo < Fraction(1, 1 << 64):
            raise ArithmeticError("root isolation failed; polynomial has a rational root")
        mid = (lo + hi) / 2
        stack.append((lo, mid))
        stack.append((mid, hi))
    if len(found) != count_roots(seq, Fraction(-pw), Fraction(pw)):
        raise ArithmeticError("root isolation failed; polynomial has a rational root")
    found.sort(key=lambda iv: iv[0], reverse=True)
    return found


def refine_root(coeffs: Sequence[int], iv: Interval, bits: int) -> Interval:
    """Bisect an isolating interval until its width is at most 2^-bits.

    The result is nested inside ``iv``.
    """
    target = Fraction(1, 1 << bits)
    lo, hi = iv.lo, iv.hi
    slo = _peval(coeffs, lo) > 0
    while hi - lo > target:
        mid = (lo + hi) / 2
        v = _peval(coeffs, mid)
        if v == 0:
            return Interval(mid, mid)
        if (v > 0) == slo:
            lo = mid
        else:
            hi = mid
    return Interval(lo, hi)
