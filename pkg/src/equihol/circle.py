"""Values on the circle group R/Z.

Holonomies and level-k actions in this package are only defined modulo 1,
so they are returned as :class:`CircleValue` rather than bare floats.  A
CircleValue remembers the raw real number it was reduced from (useful when
diagnosing how far an integral drifted from an integer) and can carry an
exact :class:`fractions.Fraction` when the computation was done in rational
arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union


def _reduce_float(x: float) -> float:
    r = x - math.floor(x)
    # x very slightly below an integer reduces to 0.9999...; keep it as is,
    # distance computations treat 0 and 1-eps as close.
    if r >= 1.0:  # can happen by rounding when x is a tiny negative number
        r -= 1.0
    return r


@dataclass(frozen=True)
class CircleValue:
    """An element of R/Z: ``value`` is the representative in [0, 1).

    ``raw`` is the real number before reduction and ``exact`` an optional
    Fraction representative (already reduced mod 1 when present).
    """

    value: float
    raw: float
    exact: Optional[Fraction] = None

    @staticmethod
    def from_real(x: Union[float, int]) -> "CircleValue":
        x = float(x)
        return CircleValue(value=_reduce_float(x), raw=x)

    @staticmethod
    def from_fraction(q: Fraction) -> "CircleValue":
        r = q - (q.numerator // q.denominator)
        return CircleValue(value=float(r), raw=float(q), exact=r)

    @property
    def nearest_integer(self) -> int:
        """Integer closest to the raw (unreduced) real."""
        return round(self.raw)

    def __neg__(self) -> "CircleValue":
        exact = None if self.exact is None else (-self.exact) % 1
        return CircleValue(value=_reduce_float(-self.value), raw=-self.raw, exact=exact)

    def __add__(self, other: "CircleValue") -> "CircleValue":
        exact = None
        if self.exact is not None and other.exact is not None:
            exact = (self.exact + other.exact) % 1
        return CircleValue(
            value=_reduce_float(self.value + other.value),
            raw=self.raw + other.raw,
            exact=exact,
        )

    def __sub__(self, other: "CircleValue") -> "CircleValue":
        return self + (-other)

    def distance(self, other: Union["CircleValue", float]) -> float:
        b = other.value if isinstance(other, CircleValue) else _reduce_float(float(other))
        d = abs(self.value - b)
        return min(d, 1.0 - d)

    def __float__(self) -> float:
        return self.value


def circle_distance(a: Union[CircleValue, float], b: Union[CircleValue, float]) -> float:
    """Distance on R/Z: min(|a-b|, 1-|a-b|) of the reduced representatives."""
    if not isinstance(a, CircleValue):
        a = CircleValue.from_real(a)
    return a.distance(b)
