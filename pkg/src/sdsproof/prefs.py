"""Weak orders, profiles, permutations and the Kendall tau manipulation metric.

Alternatives are integers ``0..m-1`` and print as ``a, b, c, ...``.  A weak
order is stored as a tuple of indifference classes, best class first.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

MAX_ALTERNATIVES = 6
LETTERS = "abcdefghijklmnopqrstuvwxyz"


class ParseError(ValueError):
    """Malformed preference text; ``pos`` is the offending character offset."""

    def __init__(self, message: str, text: str = "", pos: int = 0):
        super().__init__(f"{message} at position {pos}: {text!r}")
        self.text = text
        self.pos = pos


def alt_name(x: int) -> str:
    return LETTERS[x]


def alt_index(name: str) -> int:
    if len(name) != 1 or name not in LETTERS:
        raise ValueError(f"not an alternative name: {name!r}")
    return LETTERS.index(name)


@dataclass(frozen=True)
class WeakOrder:
    classes: tuple[frozenset[int], ...]

    def __post_init__(self):
        seen: set[int] = set()
        for cls in self.classes:
            if not cls:
                raise ValueError("empty indifference class")
            if seen & cls:
                raise ValueError("alternative listed twice")
            seen |= cls
        if seen != set(range(len(seen))):
            raise ValueError(f"classes must cover 0..m-1, got {sorted(seen)}")

    @classmethod
    def from_lists(cls, classes: Iterable[Iterable[int]]) -> "WeakOrder":
        return cls(tuple(frozenset(c) for c in classes))

    @property
    def m(self) -> int:
        return sum(len(c) for c in self.classes)

    @property
    def rank(self) -> tuple[int, ...]:
        """Class position of every alternative (0 = best)."""
        r = [0] * self.m
        for k, cls in enumerate(self.classes):
            for x in cls:
                r[x] = k
        return tuple(r)

    def geq(self, x: int, y: int) -> bool:
        r = self.rank
        return r[x] <= r[y]

    def upper_contour(self, x: int) -> frozenset[int]:
        """All y with y at least as good as x."""
        r = self.rank
        return frozenset(y for y in range(self.m) if r[y] <= r[x])

    def prefixes(self) -> list[frozenset[int]]:
        """Distinct upper contour sets, smallest first (the last one is A)."""
        out, acc = [], frozenset()
        for cls in self.classes:
            acc = acc | cls
            out.append(acc)
        return out

    def is_linear(self) -> bool:
        return all(len(c) == 1 for c in self.classes)

    def __str__(self) -> str:
        return format_weak_order(self)


@dataclass(frozen=True)
class Permutation:
    """Bijection on alternatives; ``image[x]`` is where ``x`` goes."""

    image: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.image) != list(range(len(self.image))):
            raise ValueError(f"not a permutation: {self.image}")

    @classmethod
    def identity(cls, m: int) -> "Permutation":
        return cls(tuple(range(m)))

    @classmethod
    def from_cycles(cls, text: str, m: int) -> "Permutation":
        """Parse cycle notation such as ``(a b)(c d)`` or ``(a)(b c)(d)``."""
        image = list(range(m))
        for cyc in text.replace(" ", "").replace(")(", ")|(").split("|"):
            cyc = cyc.strip()
            if not cyc:
                continue
            if cyc[0] != "(" or cyc[-1] != ")":
                raise ParseError("bad cycle", text, text.find(cyc))
            xs = [alt_index(ch) for ch in cyc[1:-1]]
            for i, x in enumerate(xs):
                image[x] = xs[(i + 1) % len(xs)]
        return cls(tuple(image))

    @property
    def m(self) -> int:
        return len(self.image)

    def __call__(self, x: int) -> int:
        return self.image[x]

    def compose(self, other: "Permutation") -> "Permutation":
        """``self after other``: x -> self(other(x))."""
        return Permutation(tuple(self.image[other.image[x]] for x in range(self.m)))

    def inverse(self) -> "Permutation":
        inv = [0] * self.m
        for x, y in enumerate(self.image):
            inv[y] = x
        return Permutation(tuple(inv))

    def is_identity(self) -> bool:
        return all(x == y for x, y in enumerate(self.image))

    def cycles(self) -> list[tuple[int, ...]]:
        seen, out = set(), []
        for start in range(self.m):
            if start in seen:
                continue
            cyc, x = [], start
            while x not in seen:
                seen.add(x)
                cyc.append(x)
                x = self.image[x]
            out.append(tuple(cyc))
        return out

    def cycle_type(self) -> tuple[int, ...]:
        return tuple(sorted(len(c) for c in self.cycles()))

    def __str__(self) -> str:
        return "".join("(" + " ".join(alt_name(x) for x in c) + ")" for c in self.cycles())


def all_permutations(m: int) -> list[Permutation]:
    return [Permutation(p) for p in itertools.permutations(range(m))]


@dataclass(frozen=True)
class Profile:
    orders: tuple[WeakOrder, ...]

    def __post_init__(self):
        if not self.orders:
            raise ValueError("profile needs at least one agent")
        if len({r.m for r in self.orders}) != 1:
            raise ValueError("orders over different alternative sets")

    @property
    def n(self) -> int:
        return len(self.orders)

    @property
    def m(self) -> int:
        return self.orders[0].m

    def __iter__(self) -> Iterator[WeakOrder]:
        return iter(self.orders)

    def __getitem__(self, i: int) -> WeakOrder:
        return self.orders[i]

    def __str__(self) -> str:
        return " | ".join(map(str, self.orders))


def replace(profile: Profile, i: int, order: WeakOrder) -> Profile:
    """Profile identical to ``profile`` except agent ``i`` reports ``order``."""
    if not 0 <= i < profile.n:
        raise IndexError(f"agent {i} out of range for n={profile.n}")
    orders = list(profile.orders)
    orders[i] = order
    return Profile(tuple(orders))


# -- enumeration -------------------------------------------------------------

def _ordered_partitions(items: tuple[int, ...]) -> Iterator[tuple[tuple[int, ...], ...]]:
    if not items:
        yield ()
        return
    # best class first; candidate classes in lexicographic order of their members
    subsets = [s for k in range(1, len(items) + 1) for s in itertools.combinations(items, k)]
    subsets.sort()
    for first in subsets:
        rest = tuple(x for x in items if x not in first)
        for tail in _ordered_partitions(rest):
            yield (first,) + tail


@lru_cache(maxsize=None)
def enumerate_weak_orders(m: int) -> tuple[WeakOrder, ...]:
    """Every weak order on ``m`` alternatives, in the fixed canonical ordering."""
    if not 1 <= m <= MAX_ALTERNATIVES:
        raise ValueError(f"m must be in 1..{MAX_ALTERNATIVES}, got {m}")
    return tuple(WeakOrder.from_lists(p) for p in _ordered_partitions(tuple(range(m))))


@lru_cache(maxsize=None)
def order_index(m: int) -> dict[WeakOrder, int]:
    return {r: i for i, r in enumerate(enumerate_weak_orders(m))}


@lru_cache(maxsize=None)
def permutation_table(m: int) -> tuple[tuple[int, ...], ...]:
    """``table[k][i]`` = index of the image of order ``i`` under permutation ``k``.

    Permutations are indexed in ``all_permutations(m)`` order.
    """
    orders = enumerate_weak_orders(m)
    idx = order_index(m)
    return tuple(
        tuple(idx[apply_permutation(r, pi)] for r in orders) for pi in all_permutations(m)
    )


# -- metric ------------------------------------------------------------------

def kendall_tau(r1: WeakOrder, r2: WeakOrder) -> int:
    """Pairwise disagreement count: 1 per tie-vs-strict pair, 2 per reversed pair."""
    if r1.m != r2.m:
        raise ValueError("orders over different alternative sets")
    a, b = r1.rank, r2.rank
    d = 0
    for x, y in itertools.combinations(range(r1.m), 2):
        s1 = (a[x] > a[y]) - (a[x] < a[y])
        s2 = (b[x] > b[y]) - (b[x] < b[y])
        d += abs(s1 - s2)
    return d


# -- permutations acting on preferences ---------------------------------------

def apply_permutation(target, pi: Permutation):
    """Rename alternatives by ``pi`` in a weak order, profile or anonymous profile."""
    from .canon import AnonymousProfile

    if isinstance(target, WeakOrder):
        if target.m != pi.m:
            raise ValueError("permutation size mismatch")
        return WeakOrder(tuple(frozenset(pi(x) for x in cls) for cls in target.classes))
    if isinstance(target, Profile):
        return Profile(tuple(apply_permutation(r, pi) for r in target.orders))
    if isinstance(target, AnonymousProfile):
        if target.m != pi.m:
            raise ValueError("permutation size mismatch")
        idx = order_index(target.m)
        orders = enumerate_weak_orders(target.m)
        return AnonymousProfile(
            target.m, tuple(sorted(idx[apply_permutation(orders[i], pi)] for i in target.items))
        )
    raise TypeError(f"cannot permute {type(target).__name__}")


# -- text form -----------------------------------------------------------------

def parse_weak_order(text: str, m: int | None = None) -> WeakOrder:
    """Parse ``a,{b,c},d`` style notation.

    ``m`` defaults to the number of alternatives mentioned; when given, the
    text must mention exactly ``a`` .. the m-th letter.
    """
    classes: list[list[int]] = []
    seen: set[int] = set()
    i, n = 0, len(text)

    def skip_ws(j):
        while j < n and text[j].isspace():
            j += 1
        return j

    def read_alt(j):
        j = skip_ws(j)
        if j >= n or text[j] not in LETTERS:
            raise ParseError("expected alternative", text, j)
        x = LETTERS.index(text[j])
        if x in seen:
            raise ParseError(f"duplicate alternative {text[j]!r}", text, j)
        seen.add(x)
        return x, j + 1

    while True:
        i = skip_ws(i)
        if i < n and text[i] == "{":
            group = []
            i += 1
            while True:
                x, i = read_alt(i)
                group.append(x)
                i = skip_ws(i)
                if i < n and text[i] == ",":
                    i += 1
                    continue
                if i < n and text[i] == "}":
                    i += 1
                    break
                raise ParseError("expected ',' or '}'", text, i)
            classes.append(group)
        else:
            x, i = read_alt(i)
            classes.append([x])
        i = skip_ws(i)
        if i == n:
            break
        if text[i] != ",":
            raise ParseError("expected ','", text, i)
        i += 1

    expected = set(range(m if m is not None else len(seen)))
    if seen != expected:
        raise ParseError(f"alternatives {sorted(map(alt_name, seen))} do not form a..{alt_name(len(expected) - 1)}", text, 0)
    return WeakOrder.from_lists(classes)


def format_weak_order(order: WeakOrder) -> str:
    parts = []
    for cls in order.classes:
        names = ",".join(alt_name(x) for x in sorted(cls))
        parts.append(names if len(cls) == 1 else "{" + names + "}")
    return ",".join(parts)


def parse_profile(lines: Iterable[str] | str, m: int | None = None) -> Profile:
    """One order per line; blank lines and ``#`` comments are skipped."""
    if isinstance(lines, str):
        lines = lines.splitlines()
    orders = []
    for line in lines:
        line = line.split("#", 1)[0].strip()
        if line:
            orders.append(parse_weak_order(line, m))
    if not orders:
        raise ParseError("empty profile", "", 0)
    if m is None and len({r.m for r in orders}) != 1:
        raise ParseError("agents disagree on the alternative set", "", 0)
    return Profile(tuple(orders))


def read_profile(path, m: int | None = None) -> Profile:
    with open(path) as f:
        return parse_profile(f.read(), m)


def format_profile(profile: Profile) -> str:
    return "\n".join(map(format_weak_order, profile.orders)) + "\n"


def profile_from_strings(orders: Sequence[str]) -> Profile:
    return Profile(tuple(parse_weak_order(s) for s in orders))
