"""Exact rational linear programming: two-phase tableau simplex with Bland's rule."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

RELATIONS = ("<=", "=", ">=")


class LpStatus(Enum):
    OPTIMAL = "Optimal"
    UNBOUNDED = "Unbounded"
    INFEASIBLE = "Infeasible"


@dataclass
class LinearProgram:
    """maximize ``objective . x + constant`` subject to ``constraints``.

    ``lower[j]`` is the lower bound of variable j; ``None`` means free.
    Missing ``lower`` means every variable is non-negative.
    """

    objective: Sequence[Fraction]
    constraints: list[tuple[Sequence[Fraction], str, Fraction]] = field(default_factory=list)
    lower: Sequence[Fraction | None] | None = None
    constant: Fraction = Fraction(0)

    @property
    def n(self) -> int:
        return len(self.objective)

    def bounds(self) -> list[Fraction | None]:
        if self.lower is None:
            return [Fraction(0)] * self.n
        return [None if b is None else Fraction(b) for b in self.lower]

    def add(self, coeffs, rel: str, rhs) -> None:
        self.constraints.append((coeffs, rel, Fraction(rhs)))

    def validate(self) -> None:
        if self.lower is not None and len(self.lower) != self.n:
            raise ValueError("lower bounds have the wrong length")
        for coeffs, rel, _ in self.constraints:
            if len(coeffs) != self.n:
                raise ValueError(f"constraint has {len(coeffs)} coefficients, expected {self.n}")
            if rel not in RELATIONS:
                raise ValueError(f"unknown relation {rel!r}")

    def dump(self) -> str:
        """Row-per-constraint text with exact fractions (for debugging)."""
        def row(cs):
            return " ".join(f"{Fraction(c)}" for c in cs)
        lines = [f"max {row(self.objective)} + {self.constant}"]
        lines += [f"  {row(cs)} {rel} {rhs}" for cs, rel, rhs in self.constraints]
        lines.append("  lower " + " ".join("free" if b is None else str(b) for b in self.bounds()))
        return "\n".join(lines) + "\n"


@dataclass
class LpOutcome:
    status: LpStatus
    value: Fraction | None = None
    x: list[Fraction] | None = None
    duals: list[Fraction] | None = None  # one per constraint, max-problem sign convention


def _pivot(T: list[list[Fraction]], obj: list[Fraction], basis: list[int], r: int, c: int) -> None:
    prow = T[r]
    piv = prow[c]
    if piv != 1:
        inv = 1 / piv
        for j, v in enumerate(prow):
            if v:
                prow[j] = v * inv
    nz = [(j, v) for j, v in enumerate(prow) if v]
    for i, row in enumerate(T):
        if i != r:
            f = row[c]
            if f:
                for j, v in nz:
                    row[j] -= f * v
    f = obj[c]
    if f:
        for j, v in nz:
            obj[j] -= f * v
    basis[r] = c


def _run(T, obj, basis, allowed: int) -> bool:
    """Bland's rule on reduced-cost row ``obj`` (last entry = -value). False if unbounded."""
    while True:
        enter = next((j for j in range(allowed) if obj[j] > 0), None)
        if enter is None:
            return True
        best = None
        for i, row in enumerate(T):
            a = row[enter]
            if a > 0:
                ratio = row[-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            return False
        _pivot(T, obj, basis, best[1], enter)


def lp_solve(lp: LinearProgram) -> LpOutcome:
    lp.validate()
    n = lp.n
    bounds = lp.bounds()
    # column map: original var j -> list of (column, sign)
    cols: list[list[tuple[int, int]]] = []
    ncol = 0
    for b in bounds:
        if b is None:
            cols.append([(ncol, 1), (ncol + 1, -1)])
            ncol += 2
        else:
            cols.append([(ncol, 1)])
            ncol += 1
    nstruct = ncol
    slack_of = {}
    for i, (_, rel, _) in enumerate(lp.constraints):
        if rel != "=":
            slack_of[i] = ncol
            ncol += 1
    nrows = len(lp.constraints)
    art0 = ncol
    width = ncol + nrows + 1

    T: list[list[Fraction]] = []
    signs: list[int] = []
    for i, (coeffs, rel, rhs) in enumerate(lp.constraints):
        row = [Fraction(0)] * width
        rhs = Fraction(rhs)
        for j, a in enumerate(coeffs):
            a = Fraction(a)
            if not a:
                continue
            if bounds[j] is not None:
                rhs -= a * bounds[j]
            for c, s in cols[j]:
                row[c] += s * a
        if rel == "<=":
            row[slack_of[i]] = Fraction(1)
        elif rel == ">=":
            row[slack_of[i]] = Fraction(-1)
        row[-1] = rhs
        sign = -1 if rhs < 0 else 1
        if sign < 0:
            row = [-v for v in row]
        row[art0 + i] = Fraction(1)
        T.append(row)
        signs.append(sign)
    basis = [art0 + i for i in range(nrows)]

    # phase 1: maximize -sum(artificials); reduced costs expressed over nonbasics
    obj = [Fraction(0)] * width
    for row in T:
        for j in range(art0):
            obj[j] += row[j]
        obj[-1] += row[-1]
    _run(T, obj, basis, art0)
    if obj[-1] != 0:
        return LpOutcome(LpStatus.INFEASIBLE)
    for r, b in enumerate(basis):
        if b >= art0:
            c = next((j for j in range(art0) if T[r][j] != 0), None)
            if c is not None:
                _pivot(T, obj, basis, r, c)

    # phase 2
    cost = [Fraction(0)] * width
    for j, cj in enumerate(lp.objective):
        for c, s in cols[j]:
            cost[c] = s * Fraction(cj)
    obj = cost[:]
    for r, b in enumerate(basis):
        if cost[b]:
            f = cost[b]
            obj = [o - f * v for o, v in zip(obj, T[r])]
    if not _run(T, obj, basis, art0):
        return LpOutcome(LpStatus.UNBOUNDED)

    z = [Fraction(0)] * ncol
    for r, b in enumerate(basis):
        if b < ncol:
            z[b] = T[r][-1]
    x = []
    for j, b in enumerate(bounds):
        v = sum((s * z[c] for c, s in cols[j]), Fraction(0))
        x.append(v if b is None else v + b)
    value = sum((Fraction(c) * v for c, v in zip(lp.objective, x)), Fraction(lp.constant))
    # y = c_B B^-1, read off the artificial columns (which started as the identity)
    duals = []
    for i in range(nrows):
        y = sum((cost[b] * T[r][art0 + i] for r, b in enumerate(basis)), Fraction(0))
        duals.append(signs[i] * y)
    return LpOutcome(LpStatus.OPTIMAL, value, x, duals)


def check_optimality_certificate(lp: LinearProgram, out: LpOutcome) -> bool:
    """Exact KKT check: primal feasibility, dual sign feasibility, complementary slackness."""
    if out.status is not LpStatus.OPTIMAL:
        return False
    x, y = out.x, out.duals
    bounds = lp.bounds()
    for (coeffs, rel, rhs), yi in zip(lp.constraints, y):
        ax = sum((Fraction(a) * v for a, v in zip(coeffs, x)), Fraction(0))
        slack = Fraction(rhs) - ax
        if rel == "<=" and (slack < 0 or yi < 0):
            return False
        if rel == ">=" and (slack > 0 or yi > 0):
            return False
        if rel == "=" and slack != 0:
            return False
        if yi * slack != 0:
            return False
    for j, b in enumerate(bounds):
        reduced = Fraction(lp.objective[j]) - sum(
            (Fraction(coeffs[j]) * yi for (coeffs, _, _), yi in zip(lp.constraints, y)), Fraction(0)
        )
        if b is None:
            if reduced != 0:
                return False
        else:
            if x[j] < b or reduced > 0 or reduced * (x[j] - b) != 0:
                return False
    return True
