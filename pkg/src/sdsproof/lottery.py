"""Exact lotteries, stochastic dominance, random serial dictatorship and utility oracles."""
from __future__ import annotations

import random
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .prefs import ParseError, Profile, WeakOrder, alt_index, alt_name


@dataclass(frozen=True)
class Lottery:
    probs: tuple[Fraction, ...]

    def __post_init__(self):
        if any(p < 0 for p in self.probs):
            raise ValueError("negative probability")
        if sum(self.probs) != 1:
            raise ValueError(f"probabilities sum to {sum(self.probs)}, not 1")

    @classmethod
    def of(cls, values: Iterable) -> "Lottery":
        return cls(tuple(Fraction(v) for v in values))

    @classmethod
    def degenerate(cls, x: int, m: int) -> "Lottery":
        return cls(tuple(Fraction(int(y == x)) for y in range(m)))

    @classmethod
    def uniform(cls, support: Iterable[int], m: int) -> "Lottery":
        s = set(support)
        return cls(tuple(Fraction(1, len(s)) if y in s else Fraction(0) for y in range(m)))

    @property
    def m(self) -> int:
        return len(self.probs)

    @property
    def support(self) -> frozenset[int]:
        return frozenset(x for x, p in enumerate(self.probs) if p > 0)

    def __getitem__(self, x: int) -> Fraction:
        return self.probs[x]

    def __str__(self) -> str:
        return format_lottery(self)


def _mass(p: Lottery, xs) -> Fraction:
    return sum((p.probs[y] for y in xs), Fraction(0))


def sd_geq(p: Lottery, q: Lottery, order: WeakOrder) -> bool:
    """``p`` stochastically dominates ``q`` (weakly) for ``order``."""
    return all(_mass(p, s) >= _mass(q, s) for s in order.prefixes())


def sd_gt(p: Lottery, q: Lottery, order: WeakOrder) -> bool:
    return sd_geq(p, q, order) and not sd_geq(q, p, order)


def rsd(profile: Profile) -> Lottery:
    """Random serial dictatorship, ties among the final survivors split uniformly."""
    orders = profile.orders
    m = profile.m

    @lru_cache(maxsize=None)
    def go(remaining: frozenset[int], alive: frozenset[int]) -> tuple[Fraction, ...]:
        if not remaining:
            return tuple(Fraction(1, len(alive)) if x in alive else Fraction(0) for x in range(m))
        acc = [Fraction(0)] * m
        for i in remaining:
            rank = orders[i].rank
            best = min(rank[x] for x in alive)
            sub = go(remaining - {i}, frozenset(x for x in alive if rank[x] == best))
            for x in range(m):
                acc[x] += sub[x]
        return tuple(v / len(remaining) for v in acc)

    return Lottery(go(frozenset(range(profile.n)), frozenset(range(m))))


@dataclass(frozen=True)
class UtilityVector:
    values: tuple[Fraction, ...]

    def __getitem__(self, x: int) -> Fraction:
        return self.values[x]


def is_consistent(u: UtilityVector, order: WeakOrder) -> bool:
    m = order.m
    return all((u[x] >= u[y]) == order.geq(x, y) for x in range(m) for y in range(m))


def expected_utility(u: UtilityVector, p: Lottery) -> Fraction:
    if len(u.values) != p.m:
        raise ValueError("dimension mismatch")
    return sum((a * b for a, b in zip(u.values, p.probs)), Fraction(0))


def sample_consistent_utility(order: WeakOrder, seed: int) -> UtilityVector:
    """Random utility in [0,1] consistent with ``order``; deterministic in ``seed``."""
    rng = random.Random(seed)
    k = len(order.classes)
    levels = sorted(rng.sample(range(1001), k), reverse=True)
    rank = order.rank
    return UtilityVector(tuple(Fraction(levels[rank[x]], 1000) for x in range(order.m)))


def construct_violating_utility(p: Lottery, q: Lottery, order: WeakOrder) -> UtilityVector | None:
    """Consistent utility with u(q) > u(p), or None when p SD-dominates q.

    Picks the prefix with the largest shortfall eps, puts that prefix in
    [1 - eps/2, 1] and everything below it in [0, eps/2).
    """
    gaps = [(_mass(q, s) - _mass(p, s), t) for t, s in enumerate(order.prefixes())]
    eps, cut = max(gaps, key=lambda g: (g[0], -g[1]))
    if eps <= 0:
        return None
    top = cut + 1
    low = len(order.classes) - top
    level = []
    for j in range(len(order.classes)):
        if j < top:
            level.append(1 - eps / 2 * Fraction(j, top))
        else:
            level.append(eps / 2 * Fraction(low - (j - top), low + 1))
    rank = order.rank
    u = UtilityVector(tuple(level[rank[x]] for x in range(order.m)))
    assert expected_utility(u, q) > expected_utility(u, p)
    return u


# -- text form ----------------------------------------------------------------

_TERM = re.compile(r"^\s*(?:(\d+(?:/\d+)?)\s*\*\s*)?([a-z])\s*$")


def parse_lottery(text: str, m: int | None = None) -> Lottery:
    """Parse ``7/24*a + 7/24*b + 5/24*c + 5/24*d``; zero terms may be omitted."""
    coeffs: dict[int, Fraction] = {}
    pos = 0
    for term in text.split("+"):
        match = _TERM.match(term)
        if not match:
            raise ParseError("bad lottery term", text, pos)
        x = alt_index(match.group(2))
        coeffs[x] = coeffs.get(x, Fraction(0)) + Fraction(match.group(1) or 1)
        pos += len(term) + 1
    size = m if m is not None else max(coeffs) + 1
    return Lottery(tuple(coeffs.get(x, Fraction(0)) for x in range(size)))


def format_lottery(p: Lottery) -> str:
    terms = [f"{v}*{alt_name(x)}" for x, v in enumerate(p.probs) if v != 0]
    return " + ".join(terms)


def random_lottery(rng: random.Random, m: int, support: Sequence[int] | None = None, denom: int = 12) -> Lottery:
    """Random exact lottery with positive mass on exactly ``support`` (default: random)."""
    if support is None:
        support = [x for x in range(m) if rng.random() < 0.6] or [rng.randrange(m)]
    weights = [rng.randint(1, denom) for _ in support]
    total = sum(weights)
    probs = [Fraction(0)] * m
    for x, w in zip(support, weights):
        probs[x] = Fraction(w, total)
    return Lottery(tuple(probs))

