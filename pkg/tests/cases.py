"""Seeded generators of test inputs shared by the unit and acceptance suites."""
from __future__ import annotations

import random
from fractions import Fraction as F

from sdsproof.encode import Atom, Clause, LinExpr
from sdsproof.lottery import Lottery, random_lottery
from sdsproof.prefs import enumerate_weak_orders

ORDERS4 = enumerate_weak_orders(4)


def lottery_cases(n, seed):
    """n (p, q, order) triples over 4 alternatives; about a third are SD comparable."""
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        order = rng.choice(ORDERS4)
        p = random_lottery(rng, 4, denom=rng.choice([2, 3, 6, 12]))
        if rng.random() < 0.35:
            # move mass upward along the order so that q <= p in SD
            probs = list(p.probs)
            ranked = sorted(range(4), key=lambda x: order.rank[x])
            for hi, lo_ in zip(ranked, ranked[1:]):
                shift = probs[hi] * F(rng.randint(0, 2), 4)
                probs[hi] -= shift
                probs[lo_] += shift
            q = Lottery(tuple(probs))
        else:
            q = random_lottery(rng, 4)
        out.append((p, q, order))
    return out


def random_system(rng: random.Random) -> list[Clause]:
    nvars = rng.randint(1, 6)
    vs = [("X", k) for k in range(nvars)]

    def expr():
        k = rng.randint(1, min(3, nvars))
        return LinExpr.of([(v, rng.choice([-2, -1, 1, 1, 2])) for v in rng.sample(vs, k)])

    def atom():
        rhs = LinExpr.of(const=F(rng.randint(-2, 3), rng.choice([1, 2])))
        return Atom(expr(), rng.choice(["<", "<=", "=", "<="]), rhs)

    out = []
    for i in range(rng.randint(1, 8)):
        cubes = tuple(tuple(atom() for _ in range(rng.randint(1, 2))) for _ in range(rng.randint(1, 3)))
        out.append(Clause(f"C{i}", cubes))
    return out
