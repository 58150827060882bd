"""Constraint AST (linear atoms, clauses) and the four constraint families.

Variables are ``(profile id, alternative)`` pairs standing for the probability
the rule assigns to that alternative at that profile.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .canon import AnonymousProfile, anonymize, orbits
from .efficiency import minimal_inefficient_supports
from .prefs import Permutation, Profile, WeakOrder, alt_index, alt_name, order_index

Var = tuple[str, int]
RELS = ("<", "<=", "=")


def var_name(v: Var) -> str:
    return f"p_{v[0]}_{alt_name(v[1])}"


def parse_var_name(name: str) -> Var:
    if not name.startswith("p_"):
        raise ValueError(f"not a probability variable: {name!r}")
    pid, _, alt = name[2:].rpartition("_")
    return pid, alt_index(alt)


@dataclass(frozen=True)
class LinExpr:
    """``sum(c * v for v, c in terms) + const`` with terms sorted by variable."""

    terms: tuple[tuple[Var, Fraction], ...] = ()
    const: Fraction = Fraction(0)

    @staticmethod
    def of(coeffs: Mapping[Var, Fraction] | Iterable[tuple[Var, Fraction]] = (), const=0) -> "LinExpr":
        acc: dict[Var, Fraction] = {}
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        for v, c in items:
            acc[v] = acc.get(v, Fraction(0)) + Fraction(c)
        return LinExpr(tuple(sorted((v, c) for v, c in acc.items() if c)), Fraction(const))

    @staticmethod
    def var(v: Var) -> "LinExpr":
        return LinExpr(((v, Fraction(1)),))

    @staticmethod
    def total(vs: Iterable[Var]) -> "LinExpr":
        return LinExpr.of((v, 1) for v in vs)

    def __add__(self, other: "LinExpr") -> "LinExpr":
        return LinExpr.of(self.terms + other.terms, self.const + other.const)

    def __sub__(self, other: "LinExpr") -> "LinExpr":
        return self + other.scale(-1)

    def scale(self, k) -> "LinExpr":
        k = Fraction(k)
        return LinExpr.of(((v, c * k) for v, c in self.terms), self.const * k)

    def variables(self) -> set[Var]:
        return {v for v, _ in self.terms}

    def evaluate(self, x: Mapping[Var, Fraction]) -> Fraction:
        return sum((c * x[v] for v, c in self.terms), self.const)

    def __str__(self) -> str:
        parts = []
        for v, c in self.terms:
            name = f"p[{v[0]}][{alt_name(v[1])}]"
            if c == 1:
                parts.append(name)
            elif c == -1:
                parts.append("-" + name)
            else:
                parts.append(f"{c}*{name}")
        if self.const or not parts:
            parts.append(str(self.const))
        return " + ".join(parts).replace("+ -", "- ")


@dataclass(frozen=True)
class Atom:
    lhs: LinExpr
    rel: str
    rhs: LinExpr

    def __post_init__(self):
        if self.rel not in RELS:
            raise ValueError(f"relation must be one of {RELS}, got {self.rel!r}")

    def normal(self) -> tuple[LinExpr, str, Fraction]:
        """``(e, rel, c)`` with ``e`` constant-free and the atom equivalent to ``e rel c``."""
        d = self.lhs - self.rhs
        return LinExpr(d.terms), self.rel, -d.const

    def variables(self) -> set[Var]:
        return self.lhs.variables() | self.rhs.variables()

    def holds(self, x: Mapping[Var, Fraction]) -> bool:
        a, b = self.lhs.evaluate(x), self.rhs.evaluate(x)
        return a < b if self.rel == "<" else a <= b if self.rel == "<=" else a == b

    def negation(self) -> list["Atom"]:
        """Atoms whose disjunction is the negation of this one."""
        if self.rel == "<=":
            return [Atom(self.rhs, "<", self.lhs)]
        if self.rel == "<":
            return [Atom(self.rhs, "<=", self.lhs)]
        return [Atom(self.lhs, "<", self.rhs), Atom(self.rhs, "<", self.lhs)]

    def __str__(self) -> str:
        return f"{self.lhs} {self.rel} {self.rhs}"


Cube = tuple[Atom, ...]


@dataclass(frozen=True)
class Clause:
    """Disjunction of cubes (conjunctions of atoms)."""

    name: str
    cubes: tuple[Cube, ...]

    def __post_init__(self):
        if not self.cubes or any(not c for c in self.cubes):
            raise ValueError(f"clause {self.name}: cubes must be non-empty")

    def variables(self) -> set[Var]:
        return {v for cube in self.cubes for a in cube for v in a.variables()}

    def holds(self, x: Mapping[Var, Fraction]) -> bool:
        return any(all(a.holds(x) for a in cube) for cube in self.cubes)

    def __str__(self) -> str:
        def cube(c):
            body = " & ".join(map(str, c))
            return f"( {body} )" if len(c) > 1 and len(self.cubes) > 1 else body

        return f"{self.name}: " + " | ".join(map(cube, self.cubes))


def unit(name: str, atom: Atom) -> Clause:
    return Clause(name, ((atom,),))


@dataclass
class ConstraintSystem:
    m: int
    n: int
    clauses: list[Clause] = field(default_factory=list)
    profile_keys: dict[str, str] = field(default_factory=dict)  # profile id -> canonical key
    descriptor: str = ""

    def __post_init__(self):
        names = [c.name for c in self.clauses]
        if len(names) != len(set(names)):
            raise ValueError("duplicate clause names")

    @property
    def variables(self) -> list[Var]:
        out = {v for pid in self.profile_keys for v in ((pid, x) for x in range(self.m))}
        for c in self.clauses:
            out |= c.variables()
        return sorted(out, key=_var_sort_key)

    def by_name(self) -> dict[str, Clause]:
        return {c.name: c for c in self.clauses}

    def select(self, names: Iterable[str]) -> list[Clause]:
        """Clauses named exactly ``name`` or starting with ``name_``."""
        out, taken = [], set()
        for name in names:
            hits = [c for c in self.clauses if c.name == name or c.name.startswith(name + "_")]
            if not hits:
                raise KeyError(f"no condition named {name!r}")
            for c in hits:
                if c.name not in taken:
                    taken.add(c.name)
                    out.append(c)
        return out


def _var_sort_key(v: Var):
    pid, x = v
    digits = "".join(ch for ch in pid if ch.isdigit())
    return (pid.rstrip("0123456789"), int(digits) if digits else -1, pid, x)


# -- sources of profiles and edges ----------------------------------------------

@dataclass(frozen=True)
class SpEdge:
    """Manipulation in named-profile form: the agent holding ``truthful`` in ``source``."""

    name: str
    source: str
    truthful: WeakOrder
    target: str
    map: Permutation


def labeled_profiles(d) -> list[tuple[str, Profile]]:
    """``(profile id, profile)`` pairs of a domain graph or a named profile table."""
    if hasattr(d, "labeled_profiles"):
        return d.labeled_profiles()
    return [(f"P{i}", r.to_profile()) for i, r in enumerate(d.profiles)]


def sp_edges(d) -> list[SpEdge]:
    if hasattr(d, "sp_edges"):
        return d.sp_edges()
    idx = d.index()
    oidx = order_index(d.m)
    out = []
    for e in d.edges:
        s, t = idx[e.source], idx[e.target]
        out.append(SpEdge(f"S_P{s}_P{t}_{oidx[e.truthful]}_{oidx[e.misreport]}", f"P{s}", e.truthful, f"P{t}", e.map))
    return out


# -- the four families ------------------------------------------------------------

def lottery_clauses(pid: str, m: int) -> list[Clause]:
    vs = [(pid, x) for x in range(m)]
    out = [unit(f"L_{pid}_sum", Atom(LinExpr.total(vs), "=", LinExpr.of(const=1)))]
    out += [unit(f"L_{pid}_{alt_name(x)}", Atom(LinExpr.of(), "<=", LinExpr.var(v))) for x, v in enumerate(vs)]
    return out


def orbit_clauses(pid: str, profile: Profile | AnonymousProfile) -> list[Clause]:
    anon = anonymize(profile) if isinstance(profile, Profile) else profile
    out = []
    for block in orbits(anon):
        xs = sorted(block)
        for x, y in zip(xs, xs[1:]):
            atom = Atom(LinExpr.var((pid, x)), "=", LinExpr.var((pid, y)))
            out.append(unit(f"O_{pid}_{len(out) + 1}", atom))
    return out


def efficiency_clauses(pid: str, profile: Profile) -> list[Clause]:
    out = []
    for support in minimal_inefficient_supports(profile):
        xs = sorted(support)
        cubes = tuple((Atom(LinExpr.var((pid, x)), "=", LinExpr.of()),) for x in xs)
        out.append(Clause(f"E_{pid}_" + "".join(map(alt_name, xs)), cubes))
    return out


def sp_clause(edge: SpEdge, m: int) -> Clause | None:
    """The truthful outcome is not strictly SD-improved by the manipulated one.

    Cubes: for each proper upper contour set P of ``truthful``, the target puts
    strictly less mass on (the image of) P; or every such sum is equal. With a
    single proper prefix the two cases merge into one ``<=`` atom. Returns
    None for a completely indifferent manipulator.
    """
    prefixes = [p for p in edge.truthful.prefixes() if len(p) < m]
    if not prefixes:
        return None
    pairs = []
    for p in prefixes:
        xs = sorted(p)
        tgt = LinExpr.total((edge.target, edge.map(y)) for y in xs)
        src = LinExpr.total((edge.source, y) for y in xs)
        pairs.append((tgt, src))
    if len(pairs) == 1:
        return unit(edge.name, Atom(pairs[0][0], "<=", pairs[0][1]))
    cubes = [(Atom(t, "<", s),) for t, s in pairs]
    cubes.append(tuple(Atom(t, "=", s) for t, s in pairs))
    return Clause(edge.name, tuple(cubes))


def build_lottery_constraints(d) -> list[Clause]:
    return [c for pid, r in labeled_profiles(d) for c in lottery_clauses(pid, r.m)]


def build_orbit_constraints(d) -> list[Clause]:
    return [c for pid, r in labeled_profiles(d) for c in orbit_clauses(pid, r)]


def build_efficiency_constraints(d) -> list[Clause]:
    return [c for pid, r in labeled_profiles(d) for c in efficiency_clauses(pid, r)]


def build_sp_constraints(d) -> list[Clause]:
    m = d.m
    out = []
    for e in sp_edges(d):
        c = sp_clause(e, m)
        if c is not None:
            out.append(c)
    return out


FAMILIES = ("lottery", "orbit", "efficiency", "sp")


def build_system(d, families: Sequence[str] = FAMILIES, descriptor: str = "") -> ConstraintSystem:
    builders = {
        "lottery": build_lottery_constraints,
        "orbit": build_orbit_constraints,
        "efficiency": build_efficiency_constraints,
        "sp": build_sp_constraints,
    }
    clauses = []
    for fam in families:
        clauses += builders[fam](d)
    keys = {pid: anonymize(r).key() for pid, r in labeled_profiles(d)}
    return ConstraintSystem(d.m, d.n, clauses, keys, descriptor)


def sds_assignment(d, sds) -> dict[Var, Fraction]:
    """Variable values induced by an SDS (a function from Profile to Lottery)."""
    out = {}
    for pid, r in labeled_profiles(d):
        for x, v in enumerate(sds(r).probs):
            out[(pid, x)] = Fraction(v)
    return out


# -- text atoms -------------------------------------------------------------------

def parse_linexpr(text: str) -> LinExpr:
    """``p[R39][a] + 2*p[R1][b] - 1/2`` style sums."""
    s = text.replace(" ", "")
    if not s:
        raise ValueError("empty expression")
    if s[0] not in "+-":
        s = "+" + s
    term = re.compile(r"([+-])(?:(\d+(?:/\d+)?)\*?)?(p\[(\w+)\]\[([a-z])\])?")
    coeffs: list[tuple[Var, Fraction]] = []
    const = Fraction(0)
    pos = 0
    while pos < len(s):
        mt = term.match(s, pos)
        if not mt or mt.end() == pos + 1:
            raise ValueError(f"cannot parse expression {text!r} at {pos}")
        sign = -1 if mt.group(1) == "-" else 1
        num = Fraction(mt.group(2)) if mt.group(2) else None
        if mt.group(3):
            coeffs.append(((mt.group(4), alt_index(mt.group(5))), sign * (num if num is not None else 1)))
        else:
            if num is None:
                raise ValueError(f"dangling sign in {text!r}")
            const += sign * num
        pos = mt.end()
    return LinExpr.of(coeffs, const)


def parse_atom(text: str) -> Atom:
    """``lhs REL rhs`` with REL in ``<, <=, =, >=, >``."""
    mt = re.search(r"<=|>=|<|>|=", text)
    if not mt:
        raise ValueError(f"no relation in {text!r}")
    lhs, rel, rhs = text[: mt.start()], mt.group(0), text[mt.end():]
    a, b = parse_linexpr(lhs), parse_linexpr(rhs)
    if rel in (">", ">="):
        a, b, rel = b, a, rel.replace(">", "<")
    return Atom(a, rel, b)


def parse_clause_text(name: str, text: str) -> Clause:
    """``A | B | ( C & D )``: ``|`` separates cubes, ``&`` joins atoms in a cube."""
    cubes = []
    for part in text.split("|"):
        part = part.strip()
        if part.startswith("(") and part.endswith(")"):
            part = part[1:-1]
        cubes.append(tuple(parse_atom(a) for a in part.split("&")))
    return Clause(name, tuple(cubes))
