"""Batch experiments: the convergence table, profile generators, lottery draws.

Randomness comes from NumPy's Philox counter-based generator
(``numpy.random.Philox``) seeded through ``numpy.random.SeedSequence``, so
every list of profiles and every lottery draw is reproducible from its seed.
Sampling itself is exact. Rational values are assembled from integer draws,
and a lottery picks an integer uniformly below the common denominator of the
allocation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exactnum import ONE, ZERO, Rational, as_rational, binomial, render_rational, to_decimal_string
from .optimal import r_optimal_rule
from .rules import ValuationProfile

CSV_HEADER = "n,ell,binomial,pi1_exact,pi1_percent"


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    ell: int
    top_binomial: int
    pi1: Rational
    pi1_percent: str

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "ell": self.ell,
            "binomial": self.top_binomial,
            "pi1_exact": render_rational(self.pi1),
            "pi1_percent": self.pi1_percent,
        }

    def to_csv(self) -> str:
        return f"{self.n},{self.ell},{self.top_binomial},{render_rational(self.pi1)},{self.pi1_percent}"


def convergence_table(n_from: int, n_to: int) -> list:
    """Top-rank probability of the r-optimal rule for each ``n`` in range."""
    if not 3 <= n_from <= n_to:
        raise ValueError(f"need 3 <= n_from <= n_to, got {n_from}..{n_to}")
    rows = []
    for n in range(n_from, n_to + 1):
        report = r_optimal_rule(n)
        c = binomial(n - 2, report.ell - 1)
        pi1 = as_rational(c + 1) / (c + report.ell)
        assert pi1 == report.pi1_star
        rows.append(ConvergenceRow(n, report.ell, c, pi1, to_decimal_string(100 * pi1, 1)))
    return rows


def table_csv(rows: list) -> str:
    return "\n".join([CSV_HEADER] + [r.to_csv() for r in rows]) + "\n"


def gl_convergence_threshold(target) -> int:
    """Smallest ``n`` with ``1 - 1/n >= target`` (the GL top-rank probability)."""
    t = as_rational(target)
    if not 0 < t < 1:
        raise ValueError("target must lie strictly between 0 and 1")
    bound = ONE / (ONE - t)  # 1 - 1/n >= t  <=>  n >= 1/(1-t)
    return int(math.ceil(bound))


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def random_rational(rng: np.random.Generator, denom_bound: int = 64) -> Rational:
    """A rational in ``[0, 1]`` with denominator at most ``denom_bound``."""
    den = int(rng.integers(1, denom_bound + 1))
    num = int(rng.integers(0, den + 1))
    return as_rational(num) / den


def random_profiles(n: int, count: int, seed: int, denom_bound: int = 64, zero_free: bool = False) -> list:
    """``count`` profiles of ``n`` values in ``[0, 1]``, deterministic in ``seed``.

    ``zero_free`` redraws zeros, for checks whose domain excludes them.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if denom_bound < 1:
        raise ValueError("denominator bound must be at least 1")
    if n < 2:
        raise ValueError("a profile needs at least two agents")
    rng = _rng(seed)
    out = []
    for _ in range(count):
        vals = []
        while len(vals) < n:
            x = random_rational(rng, denom_bound)
            if zero_free and x == 0:
                continue
            vals.append(x)
        out.append(ValuationProfile(vals))
    return out


def structured_tie_profiles(n: int) -> list:
    """Hand-picked tie patterns: all equal, tied tops, tied middles, zero blocks."""
    third = ONE / 3
    two_thirds = 2 * third
    shapes = [
        [ONE] * n,
        [ZERO] * n,
        [ONE, ONE] + [third] * (n - 2),
        [ONE] + [two_thirds] * (n - 1),
        [ONE] + [ZERO] * (n - 1),
        [ONE, two_thirds] + [ZERO] * (n - 2),
        [ONE] * (n // 2) + [ZERO] * (n - n // 2),
        [ONE] + [two_thirds] * (n // 2) + [third] * (n - 1 - n // 2),
        [as_rational(n - i) / n for i in range(n)],
        [as_rational((i % 3) + 1) / 3 for i in range(n)],
    ]
    return [ValuationProfile(s) for s in shapes]


def _uniform_below(rng: np.random.Generator, bound: int) -> int:
    """Exactly uniform integer in ``[0, bound)`` by rejection on raw 32-bit words."""
    bits = max(1, (bound - 1).bit_length())
    words = (bits + 31) // 32
    mask = (1 << bits) - 1
    while True:
        acc = 0
        for w in rng.integers(0, 1 << 32, size=words, dtype=np.uint64):
            acc = (acc << 32) | int(w)
        acc &= mask
        if acc < bound:
            return acc


def _lottery_table(allocation) -> tuple:
    probs = [as_rational(p) for p in allocation]
    if any(p < 0 for p in probs) or sum(probs, ZERO) > 1:
        raise ValueError("allocation must be a sub-probability vector")
    den = 1
    for p in probs:
        den = den * int(p.denominator) // math.gcd(den, int(p.denominator))
    cumulative = []
    acc = 0
    for p in probs:
        acc += int(p * den)
        cumulative.append(acc)
    return den, cumulative


def _pick(cumulative: list, u: int):
    for agent, edge in enumerate(cumulative):
        if u < edge:
            return agent
    return None  # unallocated mass


def sample_lottery(outcome, seed: int):
    """Winning agent index for one draw, or ``None`` if the good is kept.

    ``outcome`` is an :class:`~rankmech.payments.Outcome` or a bare allocation
    vector.
    """
    allocation = getattr(outcome, "allocation", outcome)
    den, cumulative = _lottery_table(allocation)
    return _pick(cumulative, _uniform_below(_rng(seed), den))


def sample_lotteries(outcome, seed: int, draws: int) -> list:
    """``draws`` independent lottery results from one seeded stream."""
    allocation = getattr(outcome, "allocation", outcome)
    den, cumulative = _lottery_table(allocation)
    rng = _rng(seed)
    if den < (1 << 62):
        us = rng.integers(0, den, size=draws, dtype=np.int64)
        idx = np.searchsorted(np.asarray(cumulative, dtype=np.int64), us, side="right")
        n = len(cumulative)
        return [int(i) if i < n else None for i in idx]
    return [_pick(cumulative, _uniform_below(rng, den)) for _ in range(draws)]
