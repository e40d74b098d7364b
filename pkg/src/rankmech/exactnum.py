"""Exact rational numbers and the integer combinatorics used throughout.

All quantities in the engine (valuations, probabilities, payments) are
``gmpy2.mpq`` values. ``mpq`` interoperates with :class:`fractions.Fraction`
and ``int``, so callers may pass either; :func:`as_rational` normalizes.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational as _RationalABC
from typing import Union

from gmpy2 import mpq

Rational = type(mpq(0))

RationalLike = Union[int, Fraction, str, "mpq"]

_RATIONAL_RE = re.compile(r"^-?\d+(/\d+)?$")

ZERO = mpq(0)
ONE = mpq(1)


def parse_rational(text: str) -> Rational:
    """Parse the wire format ``-? digits ( "/" digits )?``.

    Raises ``ValueError`` on anything else, including a zero denominator,
    decimals, or embedded whitespace.
    """
    if not isinstance(text, str):
        raise TypeError(f"expected str, got {type(text).__name__}")
    if not _RATIONAL_RE.match(text):
        raise ValueError(f"malformed rational {text!r}")
    if "/" in text:
        num, den = text.split("/")
        if int(den) == 0:
            raise ValueError(f"zero denominator in {text!r}")
        return mpq(int(num), int(den))
    return mpq(int(text))


def render_rational(x: RationalLike) -> str:
    """Canonical string: ``"num/den"``, or just ``"num"`` for integers."""
    q = as_rational(x)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def as_rational(x: RationalLike) -> Rational:
    if isinstance(x, Rational):
        return x
    if isinstance(x, str):
        return parse_rational(x)
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, (int, Fraction)) or isinstance(x, _RationalABC):
        return mpq(x)
    raise TypeError(f"cannot interpret {x!r} as an exact rational (floats are rejected)")


def to_decimal_string(x: RationalLike, places: int) -> str:
    """Round-half-up (away from zero) decimal rendering, for display only."""
    q = as_rational(x)
    scaled = abs(q) * (10 ** places)
    num, den = int(scaled.numerator), int(scaled.denominator)
    digits, rem = divmod(num, den)
    if 2 * rem >= den:
        digits += 1
    text = str(digits).rjust(places + 1, "0")
    body = f"{text[:-places]}.{text[-places:]}" if places else text
    return f"-{body}" if q < 0 and digits else body


def binomial(n: int, k: int) -> int:
    """C(n, k), zero when k > n."""
    if n < 0 or k < 0:
        raise ValueError("binomial arguments must be nonnegative")
    return math.comb(n, k)


def psi(k_lo: int, k_hi: int) -> int:
    """Consecutive product ``k_lo * (k_lo+1) * ... * k_hi``.

    The empty product (``k_hi == k_lo - 1``) is 1.
    """
    if k_hi < k_lo - 1:
        raise ValueError(f"psi({k_lo}, {k_hi}) is undefined: need k_hi >= k_lo - 1")
    out = 1
    for j in range(k_lo, k_hi + 1):
        out *= j
    return out


def alternating_binomial_prefix(n: int, r: int) -> int:
    """Sum_{j=0}^{r} (-1)^j C(n, j), summed term by term."""
    if n < 1:
        raise ValueError("n must be positive")
    if r < 0 or r > n:
        raise ValueError(f"r must lie in [0, {n}], got {r}")
    total = 0
    for j in range(r + 1):
        total += (-1) ** j * math.comb(n, j)
    return total
