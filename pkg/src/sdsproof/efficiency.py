"""SD-efficiency: the dominance LP, Pareto-dominated alternatives, minimal inefficient supports."""
from __future__ import annotations

import itertools
from fractions import Fraction

from .lottery import Lottery, sd_geq, sd_gt
from .lp import LinearProgram, LpStatus, lp_solve
from .prefs import Profile


def dominance_lp(profile: Profile, p: Lottery) -> LinearProgram:
    """LP over q whose optimum is 0 exactly when no lottery SD-dominates ``p``.

    Objective: total prefix surplus of q over p, summed per agent and per
    alternative x over the upper contour set of x.
    """
    m = profile.m
    objective = [Fraction(0)] * m
    constant = Fraction(0)
    lp = LinearProgram(objective)
    seen = set()
    for order in profile.orders:
        for x in range(m):
            prefix = order.upper_contour(x)
            for y in prefix:
                objective[y] += 1
                constant -= p[y]
            if prefix not in seen:
                seen.add(prefix)
                lp.add([Fraction(int(y in prefix)) for y in range(m)], ">=", sum(p[y] for y in prefix))
    lp.constant = constant
    lp.add([Fraction(1)] * m, "=", 1)
    return lp


def is_efficient_lottery(profile: Profile, p: Lottery) -> tuple[bool, Lottery | None]:
    """Return ``(True, None)`` or ``(False, q)`` with q SD-dominating p for everyone."""
    out = lp_solve(dominance_lp(profile, p))
    if out.status is not LpStatus.OPTIMAL:
        raise RuntimeError(f"dominance LP unexpectedly {out.status.value}")
    if out.value == 0:
        return True, None
    q = Lottery(tuple(out.x))
    assert all(sd_geq(q, p, r) for r in profile.orders)
    assert any(sd_gt(q, p, r) for r in profile.orders)
    return False, q


def pareto_dominated_alternatives(profile: Profile) -> frozenset[int]:
    m = profile.m
    out = set()
    for x, y in itertools.permutations(range(m), 2):
        if all(r.geq(y, x) for r in profile.orders) and any(not r.geq(x, y) for r in profile.orders):
            out.add(x)
    return frozenset(out)


def is_inefficient_support(profile: Profile, support) -> bool:
    """Every lottery with exactly this support is SD-dominated (tested on the uniform one)."""
    return not is_efficient_lottery(profile, Lottery.uniform(support, profile.m))[0]


def minimal_inefficient_supports(profile: Profile) -> list[frozenset[int]]:
    """Inclusion-minimal inefficient supports, smallest first."""
    m = profile.m
    found: list[frozenset[int]] = []
    for size in range(1, m + 1):
        for s in itertools.combinations(range(m), size):
            s = frozenset(s)
            if any(f <= s for f in found):
                continue
            if is_inefficient_support(profile, s):
                found.append(s)
    return found
