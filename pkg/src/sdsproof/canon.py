"""Anonymity and neutrality: anonymous profiles, canonical forms, automorphisms, orbits."""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .prefs import (
    Permutation,
    Profile,
    all_permutations,
    enumerate_weak_orders,
    order_index,
    permutation_table,
)

MAX_CANON_M = 4


@dataclass(frozen=True)
class AnonymousProfile:
    """Multiset of weak-order indices (into ``enumerate_weak_orders(m)``), stored sorted."""

    m: int
    items: tuple[int, ...]

    def __post_init__(self):
        if tuple(sorted(self.items)) != self.items:
            raise ValueError("items must be sorted")
        k = len(enumerate_weak_orders(self.m))
        if self.items and not (0 <= self.items[0] and self.items[-1] < k):
            raise ValueError("weak-order index out of range")

    @classmethod
    def from_counts(cls, m: int, counts: dict[int, int]) -> "AnonymousProfile":
        return cls(m, tuple(sorted(i for i, c in counts.items() for _ in range(c))))

    @property
    def n(self) -> int:
        return len(self.items)

    @property
    def counts(self) -> dict[int, int]:
        return dict(sorted(Counter(self.items).items()))

    def count_vector(self) -> tuple[int, ...]:
        v = [0] * len(enumerate_weak_orders(self.m))
        for i in self.items:
            v[i] += 1
        return tuple(v)

    def key(self) -> str:
        """Stable identifier, e.g. ``(3:1)-(10:2)-(40:1)``."""
        return "-".join(f"({i}:{c})" for i, c in self.counts.items())

    def distinct_orders(self):
        orders = enumerate_weak_orders(self.m)
        return [orders[i] for i in self.counts]

    def to_profile(self) -> Profile:
        orders = enumerate_weak_orders(self.m)
        return Profile(tuple(orders[i] for i in self.items))


@dataclass(frozen=True)
class CanonicalProfile:
    anon: AnonymousProfile
    witness: Permutation  # input labeling -> canonical labeling

    @property
    def key(self) -> str:
        return self.anon.key()


def anonymize(profile: Profile) -> AnonymousProfile:
    idx = order_index(profile.m)
    return AnonymousProfile(profile.m, tuple(sorted(idx[r] for r in profile.orders)))


def _image(table_row, items) -> tuple[int, ...]:
    return tuple(sorted(table_row[i] for i in items))


def canonicalize(r: AnonymousProfile | Profile) -> CanonicalProfile:
    """Lexicographically minimal count vector over all relabelings of ``r``.

    For two multisets of equal size, the count vector is lexicographically
    smaller exactly when the sorted index tuple is lexicographically larger,
    so the search maximises sorted tuples.
    """
    if isinstance(r, Profile):
        r = anonymize(r)
    table = permutation_table(r.m)
    best, best_k = None, 0
    for k, row in enumerate(table):
        img = _image(row, r.items)
        if best is None or img > best:
            best, best_k = img, k
    return CanonicalProfile(AnonymousProfile(r.m, best), all_permutations(r.m)[best_k])


def automorphisms(r: AnonymousProfile) -> list[Permutation]:
    perms = all_permutations(r.m)
    return [perms[k] for k, row in enumerate(permutation_table(r.m)) if _image(row, r.items) == r.items]


def orbits(r: AnonymousProfile) -> list[frozenset[int]]:
    """Orbits of the automorphism group on alternatives, sorted by smallest member."""
    parent = list(range(r.m))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for pi in automorphisms(r):
        for x in range(r.m):
            a, b = find(x), find(pi(x))
            if a != b:
                parent[max(a, b)] = min(a, b)
    blocks: dict[int, set[int]] = {}
    for x in range(r.m):
        blocks.setdefault(find(x), set()).add(x)
    return sorted((frozenset(b) for b in blocks.values()), key=min)


# -- full enumeration ----------------------------------------------------------

def count_anonymous_profiles(m: int, n: int) -> int:
    k = len(enumerate_weak_orders(m))
    return math.comb(k + n - 1, n)


def _all_multisets(k: int, n: int) -> np.ndarray:
    arr = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations_with_replacement(range(k), n)),
        dtype=np.int64,
    )
    return arr.reshape(-1, n)


def _encode(sorted_rows: np.ndarray, k: int) -> np.ndarray:
    key = np.zeros(len(sorted_rows), dtype=np.int64)
    for j in range(sorted_rows.shape[1]):
        key = key * k + sorted_rows[:, j]
    return key


@lru_cache(maxsize=8)
def _canonical_rows(m: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    if m > MAX_CANON_M:
        raise ValueError(f"full canonical enumeration is limited to m <= {MAX_CANON_M}")
    if n < 1:
        raise ValueError("n must be positive")
    k = len(enumerate_weak_orders(m))
    if k ** n >= 2 ** 62:
        raise ValueError("profile space too large to encode")
    rows = _all_multisets(k, n)
    own = _encode(rows, k)
    canonical = np.ones(len(rows), dtype=bool)
    tables = np.array(permutation_table(m), dtype=np.int64)
    for t in tables:
        img = np.sort(t[rows], axis=1)
        canonical &= own >= _encode(img, k)
    rows = rows[canonical]
    # class size = number of distinct relabelings of the representative
    keys = np.stack([_encode(np.sort(t[rows], axis=1), k) for t in tables], axis=1)
    keys.sort(axis=1)
    sizes = 1 + (np.diff(keys, axis=1) != 0).sum(axis=1)
    return rows, sizes


def canonical_count(m: int, n: int) -> int:
    return len(_canonical_rows(m, n)[0])


def canonical_class_sizes(m: int, n: int) -> np.ndarray:
    return _canonical_rows(m, n)[1]


def enumerate_canonical_profiles(m: int, n: int) -> list[CanonicalProfile]:
    """One representative per anonymity+neutrality class, in ascending item order."""
    rows, _ = _canonical_rows(m, n)
    ident = Permutation.identity(m)
    return [CanonicalProfile(AnonymousProfile(m, tuple(int(v) for v in row)), ident) for row in rows]
