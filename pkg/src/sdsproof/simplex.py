"""Incremental bounded simplex over delta-rationals with Farkas explanations.

Values are pairs ``(a, b)`` meaning ``a + b*delta`` for a symbolic positive
infinitesimal delta, compared lexicographically. A strict bound ``f < c``
becomes ``f <= c - delta``, so one shared delta handles every strict atom.

Every distinct linear form (scaled so its leading coefficient is 1) gets a
slack variable; atoms then only tighten bounds, which makes push/pop cheap.
Conflicts come back as ``{tag: multiplier}`` maps: the multiplier-weighted sum
of the tagged atoms (each read as ``expr rel const``) cancels every variable
and leaves a false constant inequality.
"""
from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from typing import Hashable, Mapping

from gmpy2 import mpq

DR = tuple  # (mpq, mpq)
ZERO = mpq(0)
ONE = mpq(1)


def _add(u: DR, v: DR) -> DR:
    return (u[0] + v[0], u[1] + v[1])


def _sub(u: DR, v: DR) -> DR:
    return (u[0] - v[0], u[1] - v[1])


def _mul(c, u: DR) -> DR:
    return (c * u[0], c * u[1])


def _frac(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


def conflict_to_fractions(conflict: dict) -> dict:
    return {tag: _frac(mpq(lam)) for tag, lam in conflict.items()}


def _merge(acc: dict, expl: dict, w) -> None:
    for tag, mult in expl.items():
        acc[tag] = acc.get(tag, ZERO) + w * mult


class DeltaSimplex:
    def __init__(self):
        self.index: dict[Hashable, int] = {}  # external variable -> column
        self.keys: list[Hashable | None] = []
        self.forms: dict[tuple, int] = {}
        self.rows: dict[int, dict[int, mpq]] = {}
        self.cols: dict[int, set[int]] = defaultdict(set)
        self.val: list[DR] = []
        self.lo: list = []  # (DR, explanation) or None
        self.hi: list = []
        self.trail: list = []
        self.marks: list[int] = []
        self.pivots = 0

    # -- variables ----------------------------------------------------------
    def _new(self, key=None) -> int:
        self.keys.append(key)
        self.val.append((ZERO, ZERO))
        self.lo.append(None)
        self.hi.append(None)
        return len(self.keys) - 1

    def variable(self, key: Hashable) -> int:
        v = self.index.get(key)
        if v is None:
            v = self.index[key] = self._new(key)
        return v

    def _form(self, terms: tuple) -> int:
        v = self.forms.get(terms)
        if v is not None:
            return v
        row: dict[int, mpq] = {}
        value = (ZERO, ZERO)
        for key, c in terms:
            x = self.variable(key)
            value = _add(value, _mul(c, self.val[x]))
            if x in self.rows:
                for j, a in self.rows[x].items():
                    row[j] = row.get(j, ZERO) + c * a
            else:
                row[x] = row.get(x, ZERO) + c
        row = {j: a for j, a in row.items() if a}
        s = self._new()
        self.val[s] = value
        self.rows[s] = row
        for j in row:
            self.cols[j].add(s)
        self.forms[terms] = s
        return s

    # -- bounds -------------------------------------------------------------
    def push(self) -> None:
        self.marks.append(len(self.trail))

    def pop(self) -> None:
        mark = self.marks.pop()
        while len(self.trail) > mark:
            v, side, old = self.trail.pop()
            (self.hi if side else self.lo)[v] = old

    def assert_linear(self, terms: Mapping, rel: str, const, tag) -> dict | None:
        """Assert ``sum(c * key) rel const``; returns a conflict or None (check() still needed)."""
        const = mpq(const.numerator, const.denominator)
        items = sorted((k, mpq(c.numerator, c.denominator)) for k, c in terms.items() if c)
        if not items:
            ok = 0 <= const if rel == "<=" else 0 < const if rel == "<" else const == 0
            if ok:
                return None
            return {tag: Fraction(-1 if (rel == "=" and const > 0) else 1)}
        k = items[0][1]
        form = tuple((key, c / k) for key, c in items)
        if len(form) == 1:
            v = self.variable(form[0][0])
        else:
            v = self._form(form)
        b = const / k
        if rel == "=":
            return self._bound(v, True, (b, ZERO), {tag: 1 / k}) or self._bound(v, False, (b, ZERO), {tag: -1 / k})
        eps = ONE if rel == "<" else ZERO
        if k > 0:
            return self._bound(v, True, (b, -eps), {tag: 1 / k})
        return self._bound(v, False, (b, eps), {tag: -1 / k})

    def _bound(self, v: int, upper: bool, value: DR, expl: dict) -> dict | None:
        if upper:
            cur, other = self.hi[v], self.lo[v]
            if cur is not None and cur[0] <= value:
                return None
            if other is not None and value < other[0]:
                conflict: dict = {}
                _merge(conflict, expl, ONE)
                _merge(conflict, other[1], ONE)
                return conflict
            self.trail.append((v, True, cur))
            self.hi[v] = (value, expl)
            if v not in self.rows and self.val[v] > value:
                self._update(v, value)
        else:
            cur, other = self.lo[v], self.hi[v]
            if cur is not None and cur[0] >= value:
                return None
            if other is not None and value > other[0]:
                conflict = {}
                _merge(conflict, expl, ONE)
                _merge(conflict, other[1], ONE)
                return conflict
            self.trail.append((v, False, cur))
            self.lo[v] = (value, expl)
            if v not in self.rows and self.val[v] < value:
                self._update(v, value)
        return None

    # -- simplex core -------------------------------------------------------
    def _update(self, x: int, value: DR) -> None:
        d = _sub(value, self.val[x])
        for r in self.cols.get(x, ()):
            self.val[r] = _add(self.val[r], _mul(self.rows[r][x], d))
        self.val[x] = value

    def _pivot(self, b: int, x: int) -> None:
        self.pivots += 1
        row = self.rows.pop(b)
        a = row.pop(x)
        for j in row:
            self.cols[j].discard(b)
        inv = 1 / a
        new = {b: inv}
        for j, c in row.items():
            new[j] = -c * inv
        others = self.cols.pop(x, set())
        others.discard(b)
        self.rows[x] = new
        for j in new:
            self.cols[j].add(x)
        for r in others:
            rr = self.rows[r]
            c = rr.pop(x)
            for j, cj in new.items():
                nv = rr.get(j, ZERO) + c * cj
                if nv:
                    rr[j] = nv
                    self.cols[j].add(r)
                elif j in rr:
                    del rr[j]
                    self.cols[j].discard(r)

    def _pivot_and_update(self, b: int, x: int, value: DR) -> None:
        theta = _mul(1 / self.rows[b][x], _sub(value, self.val[b]))
        self.val[b] = value
        self.val[x] = _add(self.val[x], theta)
        for r in self.cols.get(x, ()):
            if r != b:
                self.val[r] = _add(self.val[r], _mul(self.rows[r][x], theta))
        self._pivot(b, x)

    def check(self) -> dict | None:
        """Restore all bounds, or return a conflict explanation (Bland's rule)."""
        lo, hi, val = self.lo, self.hi, self.val
        while True:
            bad = None
            for b in self.rows:
                if (bad is None or b < bad) and (
                    (lo[b] is not None and val[b] < lo[b][0]) or (hi[b] is not None and val[b] > hi[b][0])
                ):
                    bad = b
            if bad is None:
                return None
            row = self.rows[bad]
            if lo[bad] is not None and val[bad] < lo[bad][0]:
                enter = None
                for x, a in row.items():
                    if (enter is None or x < enter) and (
                        (a > 0 and (hi[x] is None or val[x] < hi[x][0]))
                        or (a < 0 and (lo[x] is None or val[x] > lo[x][0]))
                    ):
                        enter = x
                if enter is None:
                    conflict: dict = {}
                    _merge(conflict, lo[bad][1], ONE)
                    for x, a in row.items():
                        _merge(conflict, hi[x][1] if a > 0 else lo[x][1], abs(a))
                    return conflict
                self._pivot_and_update(bad, enter, lo[bad][0])
            else:
                enter = None
                for x, a in row.items():
                    if (enter is None or x < enter) and (
                        (a < 0 and (hi[x] is None or val[x] < hi[x][0]))
                        or (a > 0 and (lo[x] is None or val[x] > lo[x][0]))
                    ):
                        enter = x
                if enter is None:
                    conflict = {}
                    _merge(conflict, hi[bad][1], ONE)
                    for x, a in row.items():
                        _merge(conflict, lo[x][1] if a > 0 else hi[x][1], abs(a))
                    return conflict
                self._pivot_and_update(bad, enter, hi[bad][0])

    # -- models -------------------------------------------------------------
    def delta(self) -> Fraction:
        """A concrete positive delta for which every bound holds numerically."""
        d = ONE
        for v, value in enumerate(self.val):
            for bound, upper in ((self.lo[v], False), (self.hi[v], True)):
                if bound is None:
                    continue
                small, big = (value, bound[0]) if upper else (bound[0], value)
                # need small.a + small.b*d <= big.a + big.b*d
                if small[1] > big[1]:
                    d = min(d, (big[0] - small[0]) / (small[1] - big[1]))
        return Fraction(int(d.numerator), int(d.denominator))

    def model(self) -> dict[Hashable, Fraction]:
        d = self.delta()
        return {k: _frac(self.val[v][0]) + _frac(self.val[v][1]) * d for k, v in self.index.items()}
