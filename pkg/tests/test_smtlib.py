import random
from fractions import Fraction as F

import pytest

from sdsproof.appendix import appendix_system
from sdsproof.encode import ConstraintSystem, parse_clause_text
from sdsproof.smtlib import emit_smtlib, parse_sexprs, read_smtlib
from sdsproof.solver import (
    Sat,
    SolverError,
    Unknown,
    Unsat,
    default_args,
    parse_output,
    run_solver,
)


def tiny(sat: bool) -> ConstraintSystem:
    clauses = [
        parse_clause_text("A", "p[X][a] + p[X][b] = 1"),
        parse_clause_text("B", "p[X][a] < 1/3 | p[X][b] < 1/3"),
        parse_clause_text("C", "p[X][a] >= 1/2" if sat else "p[X][a] >= 2/3 & p[X][b] >= 1/2"),
    ]
    return ConstraintSystem(2, 1, clauses, {}, "tiny")


def test_emission_is_deterministic(appendix):
    a = emit_smtlib(appendix_system(appendix), named=True)
    b = emit_smtlib(appendix_system(appendix), named=True)
    assert a == b
    assert "(set-logic QF_LRA)" in a and a.rstrip().endswith("(get-unsat-core)")
    assert "(declare-const p_R45_a Real)" in a


def test_emission_parses_back(appendix_sys):
    text = emit_smtlib(appendix_sys, named=True)
    variables, clauses = read_smtlib(text)
    assert set(variables) == set(appendix_sys.variables)
    assert [c.name for c in clauses] == [c.name for c in appendix_sys.clauses]
    rng = random.Random(1)
    for _ in range(50):
        x = {v: F(rng.randint(0, 4), 4) for v in variables}
        for ours, theirs in zip(appendix_sys.clauses, clauses):
            assert ours.holds(x) == theirs.holds(x), ours.name


def test_unnamed_emission_round_trip():
    text = emit_smtlib(tiny(True))
    _, clauses = read_smtlib(text)
    assert [c.name for c in clauses] == ["c0", "c1", "c2"]
    assert "(! " not in text


def test_sexpr_reader():
    assert parse_sexprs("(a (b c) d) ; comment\n(e)") == [["a", ["b", "c"], "d"], ["e"]]
    with pytest.raises(ValueError):
        parse_sexprs("(a (b)")


def test_parse_output():
    assert isinstance(parse_output("sat\n", False), Sat)
    out = parse_output("unsat\n(A B C)\n", True)
    assert isinstance(out, Unsat) and out.core == ["A", "B", "C"]
    assert isinstance(parse_output("unknown\n", False), Unknown)
    assert isinstance(parse_output('(error "line 1")\n', False), SolverError)
    assert isinstance(parse_output("", False), SolverError)
    assert isinstance(parse_output("unsat\n", True), SolverError)


def test_default_args():
    assert default_args("/usr/bin/z3") == ["-smt2", "-in"]
    assert default_args("cvc5")[:2] == ["--lang", "smt2"]


def test_missing_executable():
    out = run_solver("/nonexistent/solver", [], "(check-sat)\n")
    assert isinstance(out, SolverError)


@pytest.mark.solver
def test_solver_answers(solver_path):
    assert isinstance(run_solver(solver_path, None, emit_smtlib(tiny(True))), Sat)
    out = run_solver(solver_path, None, emit_smtlib(tiny(False), named=True), core=True)
    assert isinstance(out, Unsat) and set(out.core) <= {"A", "B", "C"}


def test_solver_timeout():
    out = run_solver("/bin/sleep", ["5"], "", timeout=0.2)
    assert isinstance(out, Unknown) and "timeout" in out.reason
