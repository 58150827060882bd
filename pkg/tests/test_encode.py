import random
from fractions import Fraction as F

import pytest

from sdsproof.encode import (
    Atom,
    Clause,
    ConstraintSystem,
    LinExpr,
    SpEdge,
    build_system,
    efficiency_clauses,
    lottery_clauses,
    orbit_clauses,
    parse_atom,
    parse_clause_text,
    parse_var_name,
    sds_assignment,
    sp_clause,
    var_name,
)
from sdsproof.lottery import Lottery, random_lottery, rsd, sd_gt
from sdsproof.prefs import Permutation, all_permutations, enumerate_weak_orders, parse_weak_order
from sdsproof.verify import check_assignment, violated_clauses

ORDERS4 = enumerate_weak_orders(4)


def assign(pid, p: Lottery):
    return {(pid, x): v for x, v in enumerate(p.probs)}


def nearby(rng, p: Lottery, order) -> Lottery:
    """A lottery equal to p on every prefix, or a small perturbation of it."""
    probs = list(p.probs)
    for cls in order.classes:
        xs = sorted(cls)
        if len(xs) > 1 and rng.random() < 0.7:
            a, b = rng.sample(xs, 2)
            move = probs[a] * F(rng.randint(0, 3), 3)
            probs[a] -= move
            probs[b] += move
    if rng.random() < 0.4:
        a, b = rng.sample(range(4), 2)
        move = probs[a] * F(1, rng.randint(2, 5))
        probs[a] -= move
        probs[b] += move
    return Lottery(tuple(probs))


def test_var_names():
    v = ("R39", 2)
    assert var_name(v) == "p_R39_c"
    assert parse_var_name("p_R39_c") == v
    assert parse_var_name("p_S_1_a") == ("S_1", 0)
    with pytest.raises(ValueError):
        parse_var_name("q_R1_a")


def test_parse_atom_forms():
    a = parse_atom("p[R1][a] + 2*p[R1][b] >= 1/2")
    assert a.rel == "<=" and a.lhs == LinExpr.of(const=F(1, 2))
    x = {("R1", 0): F(1, 4), ("R1", 1): F(1, 8)}
    assert a.holds(x)
    assert not parse_atom("p[R1][a] > 1/4").holds(x)
    with pytest.raises(ValueError):
        parse_atom("p[R1][a] + 1")


def test_atom_negation_covers_complement():
    rng = random.Random(0)
    for rel in ("<", "<=", "="):
        atom = Atom(LinExpr.var(("R", 0)), rel, LinExpr.var(("R", 1)))
        for _ in range(50):
            x = {("R", 0): F(rng.randint(0, 2)), ("R", 1): F(rng.randint(0, 2))}
            assert atom.holds(x) != any(n.holds(x) for n in atom.negation())


def test_lottery_and_orbit_families(example1):
    lc = lottery_clauses("P", 4)
    assert [c.name for c in lc] == ["L_P_sum", "L_P_a", "L_P_b", "L_P_c", "L_P_d"]
    oc = orbit_clauses("P", example1)
    assert len(oc) == 2
    ok = assign("P", Lottery.of([F(3, 10), F(3, 10), F(1, 5), F(1, 5)]))
    assert check_assignment(oc + lc, ok)
    bad = assign("P", Lottery.of([F(1, 2), F(1, 4), F(1, 8), F(1, 8)]))
    assert violated_clauses(oc, bad) == ["O_P_1"]


def test_efficiency_family(appendix):
    clauses = efficiency_clauses("R10", appendix.profiles["R10"])
    names = [c.name for c in clauses]
    assert "E_R10_bc" in names
    bc = next(c for c in clauses if c.name == "E_R10_bc")
    assert len(bc.cubes) == 2


def test_sp_clause_is_the_dominance_condition():
    """The clause holds exactly when the manipulated outcome does not SD-beat the truthful one."""
    rng = random.Random(42)
    perms = all_permutations(4)
    hits = {True: 0, False: 0}
    for k in range(500):
        truthful = rng.choice(ORDERS4)
        while len(truthful.classes) == 1:
            truthful = rng.choice(ORDERS4)
        pi = rng.choice(perms)
        clause = sp_clause(SpEdge(f"S{k}", "SRC", truthful, "TGT", pi), 4)
        p = random_lottery(rng, 4, denom=6)
        manip = nearby(rng, p, truthful) if rng.random() < 0.5 else random_lottery(rng, 4, denom=6)
        # the target profile carries the manipulated outcome under the relabeling pi
        tgt = [F(0)] * 4
        for y in range(4):
            tgt[pi(y)] = manip[y]
        x = assign("SRC", p) | assign("TGT", Lottery(tuple(tgt)))
        expected = not sd_gt(manip, p, truthful)
        assert clause.holds(x) == expected
        hits[expected] += 1
    assert min(hits.values()) > 50


def test_sp_clause_shapes():
    flat = parse_weak_order("{a,b,c,d}")
    ident = Permutation.identity(4)
    assert sp_clause(SpEdge("S", "A", flat, "B", ident), 4) is None
    two = sp_clause(SpEdge("S", "A", parse_weak_order("{a,b},{c,d}"), "B", ident), 4)
    assert len(two.cubes) == 1 and two.cubes[0][0].rel == "<="
    chain = sp_clause(SpEdge("S", "A", parse_weak_order("a,b,c,d"), "B", ident), 4)
    assert len(chain.cubes) == 4 and len(chain.cubes[-1]) == 3


def test_table4_rows_generate_named_clauses(appendix):
    system = build_system(appendix, families=("sp",))
    assert [c.name for c in system.clauses] == [r.name for r in appendix.rows]


def test_rsd_on_appendix(appendix):
    """RSD is anonymous, neutral and strategyproof but violates SD-efficiency here."""
    x = sds_assignment(appendix, rsd)
    for fams in (("lottery",), ("orbit",), ("sp",)):
        assert check_assignment(build_system(appendix, fams).clauses, x), fams
    bad = violated_clauses(build_system(appendix, ("efficiency",)).clauses, x)
    assert bad and all(name.startswith("E_") for name in bad)


def test_system_names_unique_and_select(appendix_sys):
    names = [c.name for c in appendix_sys.clauses]
    assert len(names) == len(set(names))
    assert len(appendix_sys.select(["L_R45"])) == 5
    assert [c.name for c in appendix_sys.select(["S_1_2"])] == ["S_1_2"]
    with pytest.raises(KeyError):
        appendix_sys.select(["S_99_1"])
    with pytest.raises(ValueError):
        ConstraintSystem(4, 4, [appendix_sys.clauses[0]] * 2)


def test_clause_text_round_trip(appendix):
    for name, text in list(appendix.conditions.items())[:20]:
        c = parse_clause_text(name, text)
        again = parse_clause_text(name, str(c).split(": ", 1)[1])
        assert again == c


def test_clause_needs_cubes():
    with pytest.raises(ValueError):
        Clause("empty", ())
