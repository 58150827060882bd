"""SMT-LIB v2 (QF_LRA) emission and a minimal reader for the emitted subset."""
from __future__ import annotations

from fractions import Fraction

from .encode import Atom, Clause, ConstraintSystem, LinExpr, parse_var_name, var_name


def _num(q: Fraction) -> str:
    q = Fraction(q)
    mag = abs(q)
    body = str(mag.numerator) if mag.denominator == 1 else f"(/ {mag.numerator} {mag.denominator})"
    return f"(- {body})" if q < 0 else body


def _expr(e: LinExpr) -> str:
    parts = []
    for v, c in e.terms:
        parts.append(var_name(v) if c == 1 else f"(* {_num(c)} {var_name(v)})")
    if e.const or not parts:
        parts.append(_num(e.const))
    return parts[0] if len(parts) == 1 else "(+ " + " ".join(parts) + ")"


def _atom(a: Atom) -> str:
    return f"({a.rel} {_expr(a.lhs)} {_expr(a.rhs)})"


def _conj(cube) -> str:
    return _atom(cube[0]) if len(cube) == 1 else "(and " + " ".join(map(_atom, cube)) + ")"


def clause_term(c: Clause) -> str:
    return _conj(c.cubes[0]) if len(c.cubes) == 1 else "(or " + " ".join(map(_conj, c.cubes)) + ")"


def emit_smtlib(system: ConstraintSystem, named: bool = False) -> str:
    lines = [f"; {system.descriptor}" if system.descriptor else "; sdsproof constraint system"]
    lines.append(f"; m={system.m} n={system.n} clauses={len(system.clauses)}")
    for pid, key in system.profile_keys.items():
        lines.append(f"; profile {pid} = {key}")
    if named:
        lines.append("(set-option :produce-unsat-cores true)")
    lines.append("(set-logic QF_LRA)")
    for v in system.variables:
        lines.append(f"(declare-const {var_name(v)} Real)")
    for c in system.clauses:
        term = clause_term(c)
        lines.append(f"(assert (! {term} :named {c.name}))" if named else f"(assert {term})")
    lines.append("(check-sat)")
    if named:
        lines.append("(get-unsat-core)")
    return "\n".join(lines) + "\n"


# -- reader -------------------------------------------------------------------------

def tokenize(text: str) -> list[str]:
    out, i, n = [], 0, len(text)
    while i < n:
        ch = text[i]
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch.isspace():
            i += 1
        elif ch in "()":
            out.append(ch)
            i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "();":
                j += 1
            out.append(text[i:j])
            i = j
    return out


def parse_sexprs(text: str) -> list:
    stack: list[list] = [[]]
    for tok in tokenize(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise ValueError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise ValueError("unbalanced '('")
    return stack[0]


def _read_num(s) -> Fraction:
    if isinstance(s, str):
        return Fraction(s)
    if s[0] == "-" and len(s) == 2:
        return -_read_num(s[1])
    if s[0] == "/":
        return _read_num(s[1]) / _read_num(s[2])
    raise ValueError(f"not a number: {s}")


def _read_expr(s) -> LinExpr:
    if isinstance(s, str):
        if s.startswith("p_"):
            return LinExpr.var(parse_var_name(s))
        return LinExpr.of(const=Fraction(s))
    head = s[0]
    if head == "+":
        out = LinExpr()
        for part in s[1:]:
            out = out + _read_expr(part)
        return out
    if head == "*":
        return _read_expr(s[2]).scale(_read_num(s[1]))
    return LinExpr.of(const=_read_num(s))


def _read_cube(s) -> tuple[Atom, ...]:
    if s[0] == "and":
        return tuple(Atom(_read_expr(a[1]), a[0], _read_expr(a[2])) for a in s[1:])
    return (Atom(_read_expr(s[1]), s[0], _read_expr(s[2])),)


def read_smtlib(text: str) -> tuple[list, list[Clause]]:
    """Variables and clauses of an emitted instance (names invented when unnamed)."""
    variables, clauses = [], []
    for cmd in parse_sexprs(text):
        if cmd[0] == "declare-const":
            variables.append(parse_var_name(cmd[1]))
        elif cmd[0] == "assert":
            term, name = cmd[1], f"c{len(clauses)}"
            if term[0] == "!":
                name = term[term.index(":named") + 1]
                term = term[1]
            cubes = tuple(_read_cube(c) for c in term[1:]) if term[0] == "or" else (_read_cube(term),)
            clauses.append(Clause(name, cubes))
    return variables, clauses
