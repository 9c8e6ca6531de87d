"""Exact scalars in Q or in a real quadratic field Q(sqrt m).

Self-similar random walks on the Basilica group need irrational weights, so
every probability in the package is a :class:`Weight`.  A weight is the pair
``(p, q)`` of rationals standing for ``p + q*sqrt(m)``; purely rational
weights carry ``m = None`` and mix freely with any quadratic field.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational

__all__ = ["Weight", "parse_weight", "squarefree"]


def squarefree(m: int) -> bool:
    if m < 2:
        return False
    k = 2
    while k * k <= m:
        if m % (k * k) == 0:
            return False
        k += 1
    return True


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot build an exact rational from {x!r}")


class Weight:
    """An element ``p + q*sqrt(m)`` of Q(sqrt m), or of Q when ``m`` is None."""

    __slots__ = ("p", "q", "m", "_hash")

    def __init__(self, p=0, q=0, m: int | None = None):
        p, q = _frac(p), _frac(q)
        if q == 0:
            m = None
        elif m is None:
            raise ValueError("an irrational part needs a field parameter m")
        elif not squarefree(m):
            raise ValueError(f"m = {m} is not a square-free integer > 1")
        self.p = p
        self.q = q
        self.m = m
        self._hash = None

    @classmethod
    def coerce(cls, x) -> Weight:
        if isinstance(x, Weight):
            return x
        return cls(x)

    @classmethod
    def sqrt(cls, m: int) -> Weight:
        return cls(0, 1, m)

    # -- structure ---------------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return self.q == 0

    def _field(self, other: Weight) -> int | None:
        if self.m is None:
            return other.m
        if other.m is None or other.m == self.m:
            return self.m
        raise ValueError(f"cannot mix Q(sqrt {self.m}) and Q(sqrt {other.m})")

    def conjugate(self) -> Weight:
        return Weight(self.p, -self.q, self.m)

    def norm(self) -> Fraction:
        """Field norm p^2 - m q^2."""
        if self.m is None:
            return self.p * self.p
        return self.p * self.p - self.m * self.q * self.q

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        try:
            other = Weight.coerce(other)
        except TypeError:
            return NotImplemented
        m = self._field(other)
        return Weight(self.p + other.p, self.q + other.q, m)

    __radd__ = __add__

    def __neg__(self):
        return Weight(-self.p, -self.q, self.m)

    def __pos__(self):
        return self

    def __sub__(self, other):
        try:
            other = Weight.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return Weight.coerce(other) - self

    def __mul__(self, other):
        try:
            other = Weight.coerce(other)
        except TypeError:
            return NotImplemented
        m = self._field(other)
        if m is None:
            return Weight(self.p * other.p)
        p = self.p * other.p + m * self.q * other.q
        q = self.p * other.q + self.q * other.p
        return Weight(p, q, m)

    __rmul__ = __mul__

    def inverse(self) -> Weight:
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero weight")
        if self.m is None:
            return Weight(1 / self.p)
        return Weight(self.p / n, -self.q / n, self.m)

    def __truediv__(self, other):
        try:
            other = Weight.coerce(other)
        except TypeError:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return Weight.coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result, base = Weight(1), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # -- order -------------------------------------------------------------

    def sign(self) -> int:
        sp = (self.p > 0) - (self.p < 0)
        sq = (self.q > 0) - (self.q < 0)
        if sq == 0:
            return sp
        if sp == 0 or sp == sq:
            return sq
        # opposite signs: compare p^2 with m q^2 (never equal, m square-free)
        return sp if self.p * self.p > self.m * self.q * self.q else sq

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def _cmp(self, other) -> int:
        return (self - Weight.coerce(other)).sign()

    def __eq__(self, other):
        if isinstance(other, Weight):
            return self.p == other.p and self.q == other.q and (self.q == 0 or self.m == other.m)
        if isinstance(other, (int, Rational)):
            return self.q == 0 and self.p == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.p) if self.q == 0 else hash((self.p, self.q, self.m))
        return self._hash

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __bool__(self):
        return self.p != 0 or self.q != 0

    # -- export ------------------------------------------------------------

    def to_fraction(self, bits: int = 0) -> Fraction:
        """Exact value if rational, else a dyadic approximation within 2**-bits of it."""
        if self.q == 0:
            return self.p
        bits = bits or 128
        scale = 1 << bits
        root = Fraction(math.isqrt(self.m * scale * scale), scale)
        return self.p + self.q * root

    def __float__(self):
        if self.q == 0:
            return float(self.p)
        # Enough guard bits that the dyadic error cannot reach the last ulp,
        # barring catastrophic cancellation beyond ~150 bits.
        size = max(abs(self.p.numerator).bit_length(), abs(self.q.numerator).bit_length())
        size += max(self.p.denominator.bit_length(), self.q.denominator.bit_length())
        return float(self.to_fraction(bits=256 + 2 * size))

    def __repr__(self):
        return f"Weight({self})"

    def __str__(self):
        if self.q == 0:
            return str(self.p)
        q = self.q
        sq = f"{abs(q)}*sqrt({self.m})" if abs(q) != 1 else f"sqrt({self.m})"
        if self.p == 0:
            return ("-" if q < 0 else "") + sq
        return f"{self.p}{'-' if q < 0 else '+'}{sq}"


_RAT = r"\d+(?:/\d+)?"
_WEIGHT_RE = re.compile(
    rf"""^\s*
    (?:(?P<rs>[+-])?\s*(?P<r>{_RAT})(?![\d/]|\s*\*?\s*sqrt))?   # rational part
    \s*
    (?:(?P<qs>[+-])?\s*(?:(?P<q>{_RAT})\s*\*\s*)?sqrt\(\s*(?P<m>\d+)\s*\))?  # irrational part
    \s*$""",
    re.VERBOSE,
)


def parse_weight(text: str, field: int | None = None) -> Weight:
    """Parse ``p/q``, ``p/q+r/s*sqrt(m)``, ``r/s*sqrt(m)`` and similar.

    If ``field`` is given, any square root must be of that ``m``.
    """
    match = _WEIGHT_RE.match(text)
    if not match or not text.strip() or (match["r"] is None and match["m"] is None):
        raise ValueError(f"malformed weight {text!r}")
    p = Fraction(match["r"]) if match["r"] else Fraction(0)
    if match["rs"] == "-":
        p = -p
    if match["m"] is None:
        return Weight(p)
    if match["r"] is not None and match["qs"] is None:
        raise ValueError(f"malformed weight {text!r}: missing sign before sqrt term")
    q = Fraction(match["q"]) if match["q"] else Fraction(1)
    if match["qs"] == "-":
        q = -q
    m = int(match["m"])
    if field is not None and m != field:
        raise ValueError(f"weight {text!r} uses sqrt({m}) but the field is Q(sqrt {field})")
    return Weight(p, q, m)
