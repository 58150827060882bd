"""Manipulation edges, Kendall-tau bounded domain expansion and profile lifting."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

from .canon import AnonymousProfile, CanonicalProfile, anonymize, canonicalize, enumerate_canonical_profiles
from .prefs import (
    Permutation,
    Profile,
    WeakOrder,
    enumerate_weak_orders,
    format_weak_order,
    kendall_tau,
    order_index,
    parse_weak_order,
)


@dataclass(frozen=True)
class ManipulationEdge:
    """Agent with ``truthful`` in ``source`` reports ``misreport`` instead.

    ``map`` sends the manipulated profile's labeling to the labeling of ``target``.
    """

    source: AnonymousProfile
    truthful: WeakOrder
    misreport: WeakOrder
    target: AnonymousProfile
    map: Permutation

    def manipulated(self) -> AnonymousProfile:
        return replace_one(self.source, self.truthful, self.misreport)

    def is_consistent(self) -> bool:
        from .prefs import apply_permutation

        return apply_permutation(self.manipulated(), self.map) == self.target


def replace_one(r: AnonymousProfile, old: WeakOrder, new: WeakOrder) -> AnonymousProfile:
    idx = order_index(r.m)
    items = list(r.items)
    items.remove(idx[old])
    items.append(idx[new])
    return AnonymousProfile(r.m, tuple(sorted(items)))


@lru_cache(maxsize=None)
def neighbours(m: int, k: int) -> tuple[tuple[int, ...], ...]:
    """``neighbours(m, k)[i]``: indices of orders at Kendall distance 1..k from order i."""
    orders = enumerate_weak_orders(m)
    return tuple(
        tuple(j for j, s in enumerate(orders) if 0 < kendall_tau(r, s) <= k) for r in orders
    )


def _as_anon(r) -> AnonymousProfile:
    if isinstance(r, CanonicalProfile):
        return r.anon
    if isinstance(r, Profile):
        return anonymize(r)
    return r


def manipulation_edges(r, k: int) -> list[ManipulationEdge]:
    """One edge per (distinct relation in ``r``, misreport within distance ``k``)."""
    if k < 0:
        raise ValueError("k must be non-negative")
    src = _as_anon(r)
    if k == 0:
        return []
    orders = enumerate_weak_orders(src.m)
    near = neighbours(src.m, k)
    edges = []
    for i in src.counts:
        for j in near[i]:
            canon = canonicalize(replace_one(src, orders[i], orders[j]))
            edges.append(ManipulationEdge(src, orders[i], orders[j], canon.anon, canon.witness))
    return edges


@dataclass
class DomainGraph:
    """Canonical profiles reached from ``seed``; ids are positions in ``profiles``."""

    seed: AnonymousProfile
    schedule: tuple[int, ...]
    profiles: list[AnonymousProfile] = field(default_factory=list)
    edges: list[ManipulationEdge] = field(default_factory=list)
    levels: list[int] = field(default_factory=list)  # BFS level per profile

    @property
    def m(self) -> int:
        return self.seed.m

    @property
    def n(self) -> int:
        return self.seed.n

    def index(self) -> dict[AnonymousProfile, int]:
        return {p: i for i, p in enumerate(self.profiles)}

    def pid(self, r: AnonymousProfile) -> str:
        return f"P{self.index()[r]}"

    def __contains__(self, r) -> bool:
        return canonicalize(_as_anon(r)).anon in set(self.profiles)

    def check(self) -> None:
        members = set(self.profiles)
        if self.seed not in members:
            raise ValueError("seed missing from profile set")
        for e in self.edges:
            if e.source not in members or e.target not in members:
                raise ValueError("edge endpoint outside the domain")


def _expand_one(args):
    r, k = args
    return manipulation_edges(r, k)


def _map(fn, items, threads: int):
    if threads <= 1 or len(items) < 64:
        return list(map(fn, items))
    with ProcessPoolExecutor(threads) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * threads))))


def expand_domain(seed, schedule: Sequence[int], threads: int = 1) -> DomainGraph:
    """Breadth-first closure of ``seed`` under k-manipulations, one k per level.

    Level t collects the targets of ``schedule[t]``-manipulations from the
    profiles first reached at level t-1. The graph keeps exactly the edges
    generated along the way, each once; profiles of the last level are not
    expanded, so they only appear as targets.
    """
    start = canonicalize(_as_anon(seed)).anon
    g = DomainGraph(start, tuple(schedule), [start], [], [0])
    seen = {start}
    frontier = [start]
    for level, k in enumerate(schedule, 1):
        nxt = []
        for edges in _map(_expand_one, [(r, k) for r in frontier], threads):
            g.edges += edges
            for e in edges:
                if e.target not in seen:
                    seen.add(e.target)
                    nxt.append(e.target)
        nxt.sort(key=lambda r: r.items)
        g.profiles += nxt
        g.levels += [level] * len(nxt)
        frontier = nxt
    return g


def full_domain(m: int, n: int, threads: int = 1) -> DomainGraph:
    """Every canonical profile with every misreport (k is the largest Kendall distance)."""
    profiles = sorted((c.anon for c in enumerate_canonical_profiles(m, n)), key=lambda r: r.items)
    kmax = m * (m - 1)
    g = DomainGraph(profiles[0], (kmax,), profiles, [], [0] * len(profiles))
    for edges in _map(_expand_one, [(r, kmax) for r in profiles], threads):
        g.edges += edges
    return g


# -- text form -----------------------------------------------------------------

def format_domain(g: DomainGraph) -> str:
    idx = g.index()
    lines = [
        "# sdsproof domain graph",
        f"m {g.m}",
        f"n {g.n}",
        f"seed {g.seed.key()}",
        "schedule " + ",".join(map(str, g.schedule)),
        f"profiles {len(g.profiles)}",
    ]
    for i, (r, lv) in enumerate(zip(g.profiles, g.levels)):
        lines.append(f"P{i} {lv} {r.key()}")
    lines.append(f"edges {len(g.edges)}")
    oidx = order_index(g.m)
    for e in g.edges:
        lines.append(
            f"P{idx[e.source]} {oidx[e.truthful]} {format_weak_order(e.misreport)} "
            f"P{idx[e.target]} {e.map}"
        )
    return "\n".join(lines) + "\n"


def _parse_key(m: int, key: str) -> AnonymousProfile:
    counts = {}
    for part in key.split("-"):
        i, c = part.strip("()").split(":")
        counts[int(i)] = int(c)
    return AnonymousProfile.from_counts(m, counts)


def parse_domain(text: str) -> DomainGraph:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    it = iter(lines)

    def field_(name):
        tag, _, value = next(it).partition(" ")
        if tag != name:
            raise ValueError(f"expected {name!r}, got {tag!r}")
        return value.strip()

    m = int(field_("m"))
    int(field_("n"))
    seed = _parse_key(m, field_("seed"))
    sched = field_("schedule")
    g = DomainGraph(seed, tuple(int(s) for s in sched.split(",")) if sched else ())
    for _ in range(int(field_("profiles"))):
        _, lv, key = next(it).split(" ", 2)
        g.profiles.append(_parse_key(m, key))
        g.levels.append(int(lv))
    orders = enumerate_weak_orders(m)
    for _ in range(int(field_("edges"))):
        src, rel, mis, tgt, cyc = next(it).split(" ", 4)
        g.edges.append(
            ManipulationEdge(
                g.profiles[int(src[1:])],
                orders[int(rel)],
                parse_weak_order(mis, m),
                g.profiles[int(tgt[1:])],
                Permutation.from_cycles(cyc, m),
            )
        )
    g.check()
    return g


# -- lifting -------------------------------------------------------------------

def lift_profile(r: Profile, m: int, n: int) -> Profile:
    """Embed a profile on a..m' with n' agents into m alternatives and n agents.

    New alternatives sit tied at the bottom of every existing agent; new agents
    are completely indifferent.
    """
    if r.m > m or r.n > n:
        raise ValueError(f"cannot lift a {r.n}x{r.m} profile into {n}x{m}")
    extra = frozenset(range(r.m, m))
    orders = []
    for order in r.orders:
        orders.append(WeakOrder(order.classes + ((extra,) if extra else ())))
    orders += [WeakOrder((frozenset(range(m)),))] * (n - r.n)
    return Profile(tuple(orders))

