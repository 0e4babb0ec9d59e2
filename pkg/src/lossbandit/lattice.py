"""Exact arithmetic on the integer lattice of cumulative sums.

A cumulative sum is stored as an integer ``total`` in units of ``1/scale``.
Comparisons of ``total / (scale * sqrt(n))`` against a decimal threshold are
done with integers so lattice atoms sitting exactly on the threshold are
classified correctly.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import reduce


def to_fraction(v) -> Fraction:
    """Decimal reading of ``v``: 0.1 becomes 1/10, not the nearest binary fraction."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ValueError(f"non-finite lattice value {v!r}")
        return Fraction(repr(v))
    return Fraction(str(v))


def common_scale(values) -> int:
    """Least common multiple of the denominators."""
    return reduce(lambda a, b: a * b // math.gcd(a, b), (to_fraction(v).denominator for v in values), 1)


def compare_scaled(total: int, scale: int, n: int, c) -> int:
    """Sign of ``total / (scale * sqrt(n)) - c`` computed exactly."""
    cf = to_fraction(c)
    a = int(total) * cf.denominator
    b = cf.numerator * scale
    # sign of a - b * sqrt(n)
    if b <= 0 <= a:
        return 0 if a == 0 and b == 0 else 1
    if a <= 0 <= b:
        return 0 if a == 0 and b == 0 else -1
    if a > 0:
        d = a * a - b * b * n
        return (d > 0) - (d < 0)
    d = b * b * n - a * a
    return (d > 0) - (d < 0)


def threshold_le(scale: int, n: int, c) -> int:
    """Largest integer ``t`` with ``t / (scale * sqrt(n)) <= c``."""
    t = math.floor(float(to_fraction(c)) * scale * math.sqrt(n))
    while compare_scaled(t + 1, scale, n, c) <= 0:
        t += 1
    while compare_scaled(t, scale, n, c) > 0:
        t -= 1
    return t


def threshold_ge(scale: int, n: int, c) -> int:
    """Smallest integer ``t`` with ``t / (scale * sqrt(n)) >= c``."""
    t = math.ceil(float(to_fraction(c)) * scale * math.sqrt(n))
    while compare_scaled(t - 1, scale, n, c) >= 0:
        t -= 1
    while compare_scaled(t, scale, n, c) < 0:
        t += 1
    return t


def on_boundary(scale: int, n: int, c) -> bool:
    """Whether some lattice total lands exactly on the threshold."""
    t = threshold_ge(scale, n, c)
    return compare_scaled(t, scale, n, c) == 0
