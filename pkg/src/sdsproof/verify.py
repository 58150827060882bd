"""Solver-independent verification of linear clause systems.

``feasible``/``entails`` decide conjunctions of linear atoms exactly.
``check_unsat`` runs a depth-first case split with unit propagation and
conflict-directed backjumping; an unsatisfiable run returns a certificate tree
that ``check_certificate`` re-verifies using only rational arithmetic.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .encode import Atom, Clause, LinExpr, Var
from .simplex import DeltaSimplex, conflict_to_fractions

# -- Farkas certificates -----------------------------------------------------------


@dataclass(frozen=True)
class FarkasCertificate:
    """Non-negative combination (any sign on equalities) of atoms that sums to ``0 < 0`` or worse."""

    terms: tuple[tuple[Atom, Fraction], ...]

    def atoms(self) -> set[Atom]:
        return {a for a, _ in self.terms}


def check_farkas(cert: FarkasCertificate) -> bool:
    """Re-derive the contradiction by summing the weighted atoms."""
    coeffs: dict[Var, Fraction] = {}
    const = Fraction(0)
    strict = False
    for atom, lam in cert.terms:
        e, rel, c = atom.normal()
        if rel != "=" and lam < 0:
            return False
        if lam == 0:
            continue
        for v, a in e.terms:
            coeffs[v] = coeffs.get(v, Fraction(0)) + lam * a
        const += lam * c
        strict = strict or rel == "<"
    if any(coeffs.values()):
        return False
    # the sum reads 0 <= const (or 0 < const when strict) and must be false
    return const < 0 or (const == 0 and strict)


@dataclass
class Feasible:
    witness: dict[Var, Fraction]


@dataclass
class Infeasible:
    certificate: FarkasCertificate


class LinearContext:
    """Stack of asserted atoms over a shared incremental simplex."""

    def __init__(self):
        self.simplex = DeltaSimplex()
        self._ids: dict[Atom, int] = {}
        self._atoms: list[Atom] = []
        self.checks = 0

    def _tag(self, atom: Atom) -> int:
        t = self._ids.get(atom)
        if t is None:
            t = self._ids[atom] = len(self._atoms)
            self._atoms.append(atom)
        return t

    def _certificate(self, conflict: dict) -> FarkasCertificate:
        conflict = conflict_to_fractions(conflict)
        return FarkasCertificate(tuple((self._atoms[t], lam) for t, lam in sorted(conflict.items()) if lam))

    def push(self) -> None:
        self.simplex.push()

    def pop(self) -> None:
        self.simplex.pop()

    def add(self, atoms: Iterable[Atom]) -> FarkasCertificate | None:
        """Assert atoms in the current frame; returns a certificate when they clash."""
        for atom in atoms:
            e, rel, c = atom.normal()
            conflict = self.simplex.assert_linear(dict(e.terms), rel, c, self._tag(atom))
            if conflict is not None:
                return self._certificate(conflict)
        self.checks += 1
        conflict = self.simplex.check()
        return None if conflict is None else self._certificate(conflict)

    def probe(self, atoms: Sequence[Atom]) -> FarkasCertificate | None:
        """Would ``atoms`` be consistent with the current frame? State is left unchanged."""
        self.push()
        try:
            return self.add(atoms)
        finally:
            self.pop()

    def model(self, variables: Iterable[Var] = ()) -> dict[Var, Fraction]:
        # a failed probe can leave values outside the restored bounds
        if self.simplex.check() is not None:
            raise RuntimeError("model requested for an inconsistent context")
        m = self.simplex.model()
        out = {v: m.get(v, Fraction(0)) for v in variables}
        out.update(m)
        return out


def feasible(atoms: Sequence[Atom]) -> Feasible | Infeasible:
    ctx = LinearContext()
    cert = ctx.add(atoms)
    if cert is not None:
        return Infeasible(cert)
    variables = {v for a in atoms for v in a.variables()}
    w = ctx.model(variables)
    return Feasible({v: w[v] for v in variables})


def entails(atoms: Sequence[Atom], claim: Atom) -> bool:
    """Every solution of ``atoms`` satisfies ``claim``."""
    return all(isinstance(feasible(list(atoms) + [neg]), Infeasible) for neg in claim.negation())


# -- case splitting --------------------------------------------------------------------


@dataclass
class Refutation:
    cube: int
    certificate: FarkasCertificate


@dataclass
class Propagation:
    """All cubes of ``clause`` but ``cube`` are refuted, so ``cube`` is asserted."""

    clause: str
    cube: int
    refuted: list[Refutation]


def cut_cubes(lemma: Sequence[Atom]) -> list[tuple[Atom, ...]]:
    """The tautology ``lemma or not lemma`` as a list of cubes: the lemma, then each negated atom."""
    return [tuple(lemma)] + [(neg,) for a in lemma for neg in a.negation()]


@dataclass
class ProofNode:
    """One step of a refutation tree.

    After the propagations, a node either closes (``conflict`` refutes the
    context, or every cube of ``clause`` is refuted) or splits, on the cubes
    of ``clause`` or, when ``cut`` is set, on ``cut_cubes(cut)``. Children are
    keyed by cube index.
    """

    propagations: list[Propagation] = field(default_factory=list)
    clause: str = ""
    refuted: list[Refutation] = field(default_factory=list)
    children: dict[int, "ProofNode"] = field(default_factory=dict)
    cut: tuple[Atom, ...] = ()
    conflict: FarkasCertificate | None = None
    needs: frozenset = field(default=frozenset(), repr=False, compare=False)

    def leaves(self) -> int:
        return 1 if not self.children else sum(c.leaves() for c in self.children.values())


@dataclass
class UnsatCertificate:
    root: ProofNode
    seconds: float = 0.0

    @property
    def branches(self) -> int:
        return self.root.leaves()

    def _nodes(self):
        stack, seen = [self.root], set()
        while stack:
            node = stack.pop()
            if id(node) in seen:
                continue
            seen.add(id(node))
            yield node
            stack.extend(node.children.values())

    def leaf_certificates(self) -> list[FarkasCertificate]:
        out = []
        for node in self._nodes():
            for p in node.propagations:
                out.extend(r.certificate for r in p.refuted)
            out.extend(r.certificate for r in node.refuted)
            if node.conflict is not None:
                out.append(node.conflict)
        return out

    def clauses_used(self) -> set[str]:
        used = set()
        for node in self._nodes():
            used.update(p.clause for p in node.propagations)
            if node.clause:
                used.add(node.clause)
        return used

    def cuts(self) -> int:
        return sum(1 for node in self._nodes() if node.cut)


@dataclass
class SatWitness:
    assignment: dict[Var, Fraction]


@dataclass
class Inconclusive:
    reason: str
    branches: int


class _Budget(Exception):
    pass


class _Sat(Exception):
    def __init__(self, assignment):
        self.assignment = assignment


class _Search:
    def __init__(self, clauses: Sequence[Clause], budget: int, lookahead: int):
        self.clauses = list(clauses)
        self.by_name = {c.name: c for c in self.clauses}
        self.ctx = LinearContext()
        self.budget = budget
        self.lookahead = lookahead
        self.nodes = 0
        self.leaves = 0
        self.active: dict[Atom, int] = {}  # asserted atoms with multiplicity

    # -- bookkeeping -------------------------------------------------------------
    def _enter(self, cube) -> set[Atom]:
        fresh = {a for a in cube if a not in self.active}
        for a in cube:
            self.active[a] = self.active.get(a, 0) + 1
        return fresh

    def _leave(self, cube) -> None:
        for a in cube:
            self.active[a] -= 1
            if not self.active[a]:
                del self.active[a]

    def _entailed_atom(self, a: Atom) -> bool:
        return a in self.active or all(self.ctx.probe([neg]) is not None for neg in a.negation())

    def _satisfied(self, clause: Clause) -> bool:
        return any(all(a in self.active for a in cube) for cube in clause.cubes)

    def _cubes(self, node: ProofNode):
        return cut_cubes(node.cut) if node.cut else self.by_name[node.clause].cubes

    @staticmethod
    def _deps(refs: list[Refutation], cubes) -> set[Atom]:
        used = set()
        for r in refs:
            used |= r.certificate.atoms() - set(cubes[r.cube])
        return used

    def _finish(self, node: ProofNode) -> ProofNode:
        """Drop propagations nothing relies on and record the context atoms the node needs."""
        used: set[Atom] = set()
        if node.conflict is not None:
            used |= node.conflict.atoms()
        if node.clause or node.cut:
            cubes = self._cubes(node)
            used |= self._deps(node.refuted, cubes)
            for k, child in node.children.items():
                used |= child.needs - set(cubes[k])
        keep = []
        for p in reversed(node.propagations):
            cubes = self.by_name[p.clause].cubes
            intro = set(cubes[p.cube])
            if used & intro:
                keep.append(p)
                used = (used - intro) | self._deps(p.refuted, cubes)
        node.propagations = keep[::-1]
        node.needs = frozenset(used)
        return node

    # -- propagation ---------------------------------------------------------------
    def _propagate(self, pending, known, props, entered):
        """Unit propagation to a fixpoint in the current frame.

        Returns ``(closing, open)``: ``closing`` is ``(clause name, refutations)``
        when some clause lost every cube, else None and ``open`` lists
        ``(clause index, alive cubes, refutations)``.
        """
        pending = list(pending)
        while True:
            progress = False
            rest = []
            for ci in pending:
                cl = self.clauses[ci]
                if self._satisfied(cl):
                    continue
                alive, refs = [], []
                for k, cube in enumerate(cl.cubes):
                    cert = known.get((ci, k))
                    if cert is None:
                        cert = self.ctx.probe(cube)
                        if cert is not None:
                            known[(ci, k)] = cert
                    if cert is None:
                        alive.append(k)
                    else:
                        refs.append(Refutation(k, cert))
                if not alive:
                    return (cl.name, refs), []
                if len(alive) == 1:
                    cube = cl.cubes[alive[0]]
                    self._enter(cube)
                    entered.append(cube)
                    self.ctx.add(cube)
                    props.append(Propagation(cl.name, alive[0], refs))
                    progress = True
                else:
                    rest.append((ci, alive, refs))
            pending = [r[0] for r in rest]
            if not progress:
                return None, rest

    def _assume(self, atoms, pending, known) -> tuple[ProofNode, set[Atom]]:
        fresh = self._enter(atoms)
        self.ctx.push()
        self.ctx.add(atoms)
        try:
            return self.solve(pending, known), fresh
        finally:
            self.ctx.pop()
            self._leave(atoms)

    # -- lookahead -------------------------------------------------------------------
    def _dilemma(self, cand, rest, known):
        """Propagate each surviving cube of one clause and collect what every branch entails.

        Returns a closing ProofNode when every cube fails, ``(lemma, negated
        branches)`` when the branches share new consequences, otherwise None.
        """
        ci, alive, refs = cand
        cl = self.clauses[ci]
        others = [r[0] for r in rest if r[0] != ci]
        failed: dict[int, ProofNode] = {}
        closures: dict[int, list[Propagation]] = {}
        for k in alive:
            entered = [cl.cubes[k]]
            self._enter(cl.cubes[k])
            self.ctx.push()
            try:
                self.ctx.add(cl.cubes[k])
                props: list[Propagation] = []
                closing, _ = self._propagate(others, dict(known), props, entered)
                if closing is None:
                    closures[k] = props
                else:
                    failed[k] = self._finish(ProofNode(props, closing[0], closing[1]))
            finally:
                self.ctx.pop()
                for cube in entered:
                    self._leave(cube)
        if not closures:
            self.leaves += 1
            return ProofNode(clause=cl.name, refuted=refs, children=failed)
        found = {a for k in closures for a in cl.cubes[k]}
        for props in closures.values():
            for p in props:
                found.update(self.by_name[p.clause].cubes[p.cube])
        candidates = [a for a in sorted(found - set(self.active), key=str) if not self._entailed_atom(a)]
        certs: dict[tuple[int, Atom], list[FarkasCertificate]] = {}
        for k, props in closures.items():
            if not candidates:
                return None
            atoms = list(cl.cubes[k]) + [a for p in props for a in self.by_name[p.clause].cubes[p.cube]]
            self.ctx.push()
            try:
                self.ctx.add(atoms)
                keep = []
                for a in candidates:
                    found_certs = []
                    for neg in a.negation():
                        cert = self.ctx.probe([neg])
                        if cert is None:
                            break
                        found_certs.append(cert)
                    else:
                        keep.append(a)
                        certs[(k, a)] = found_certs
                candidates = keep
            finally:
                self.ctx.pop()
        if not candidates:
            return None
        lemma = tuple(candidates)
        branches: dict[int, ProofNode] = {}
        for a in lemma:
            for idx in range(len(a.negation())):
                children = dict(failed)
                for k, props in closures.items():
                    children[k] = self._finish(ProofNode(list(props), conflict=certs[(k, a)][idx]))
                branches[len(branches) + 1] = self._finish(ProofNode(clause=cl.name, refuted=refs, children=children))
        return lemma, branches

    # -- search ----------------------------------------------------------------------
    @staticmethod
    def _absorb(node: ProofNode, child: ProofNode) -> None:
        node.propagations = node.propagations + child.propagations
        node.clause, node.refuted, node.children = child.clause, child.refuted, child.children
        node.cut, node.conflict = child.cut, child.conflict

    def solve(self, pending: list[int], known: dict) -> ProofNode:
        """Refute the current context plus ``pending`` clauses.

        ``known[(clause, cube)]`` caches refutations, which stay valid because
        the context only grows along a branch.
        """
        self.nodes += 1
        if self.leaves > self.budget:
            raise _Budget()
        node = ProofNode()
        entered: list = []
        self.ctx.push()
        try:
            known = dict(known)
            closing, rest = self._propagate(pending, known, node.propagations, entered)
            if closing is not None:
                node.clause, node.refuted = closing
                self.leaves += 1
                return self._finish(node)
            # clauses with a cube every model already satisfies need no split
            rest = [
                r for r in rest
                if not any(all(self._entailed_atom(a) for a in self.clauses[r[0]].cubes[k]) for k in r[1])
            ]
            if not rest:
                raise _Sat(self.ctx.model())
            order = sorted(rest, key=lambda r: (len(r[1]), self.clauses[r[0]].name))
            open_ids = [r[0] for r in rest]
            for cand in order[: self.lookahead]:
                outcome = self._dilemma(cand, rest, known)
                if outcome is None:
                    continue
                if isinstance(outcome, ProofNode):
                    self._absorb(node, outcome)
                    return self._finish(node)
                lemma, branches = outcome
                child, fresh = self._assume(lemma, open_ids, known)
                if not child.needs & fresh:
                    self._absorb(node, child)
                    return self._finish(node)
                node.cut = lemma
                node.children = {0: child, **branches}
                return self._finish(node)
            ci, alive, refs = order[0]
            cl = self.clauses[ci]
            others = [i for i in open_ids if i != ci]
            node.clause, node.refuted = cl.name, refs
            for k in alive:
                child, fresh = self._assume(cl.cubes[k], others, known)
                if not child.needs & fresh:
                    # the branch never used this cube: its proof works one level up
                    self._absorb(node, child)
                    return self._finish(node)
                node.children[k] = child
            return self._finish(node)
        finally:
            for cube in entered:
                self._leave(cube)
            self.ctx.pop()


def check_unsat(
    clauses: Sequence[Clause], budget: int = 100_000, lookahead: int = 1_000
) -> UnsatCertificate | SatWitness | Inconclusive:
    """Decide a clause system by case splitting; certificates are independently checkable.

    Before splitting, up to ``lookahead`` candidate clauses are probed: each
    surviving cube is propagated, and facts entailed in every branch are
    established by a cut instead of a full split.
    """
    start = time.perf_counter()
    search = _Search(clauses, budget, lookahead)
    try:
        root = search.solve(list(range(len(search.clauses))), {})
    except _Sat as sat:
        variables = {v for c in clauses for v in c.variables()}
        return SatWitness({v: sat.assignment.get(v, Fraction(0)) for v in variables})
    except _Budget:
        return Inconclusive(f"branch budget {budget} exhausted", search.leaves)
    return UnsatCertificate(root, time.perf_counter() - start)


def check_certificate(cert: UnsatCertificate, clauses: Sequence[Clause]) -> bool:
    """Replay the proof tree: every refutation is a valid Farkas combination of
    atoms available at that point, closing clauses have all cubes refuted, and
    every split (on a clause or a cut) covers all unrefuted cubes."""
    by_name = {c.name: c for c in clauses}

    def refutes(ref: Refutation, cubes, context: set[Atom]) -> bool:
        if not 0 <= ref.cube < len(cubes):
            return False
        allowed = context | set(cubes[ref.cube])
        return ref.certificate.atoms() <= allowed and check_farkas(ref.certificate)

    def walk(node: ProofNode, context: set[Atom]) -> bool:
        context = set(context)
        for p in node.propagations:
            clause = by_name.get(p.clause)
            if clause is None or not 0 <= p.cube < len(clause.cubes):
                return False
            covered = {r.cube for r in p.refuted}
            if covered | {p.cube} != set(range(len(clause.cubes))):
                return False
            if not all(refutes(r, clause.cubes, context) for r in p.refuted):
                return False
            context |= set(clause.cubes[p.cube])
        if node.conflict is not None:
            return not node.children and node.conflict.atoms() <= context and check_farkas(node.conflict)
        if node.cut:
            if node.clause or node.refuted:
                return False
            cubes = cut_cubes(node.cut)
        else:
            clause = by_name.get(node.clause)
            if clause is None:
                return False
            cubes = clause.cubes
        if not all(refutes(r, cubes, context) for r in node.refuted):
            return False
        covered = {r.cube for r in node.refuted}
        if covered | set(node.children) != set(range(len(cubes))):
            return False
        return all(walk(child, context | set(cubes[k])) for k, child in node.children.items())

    return walk(cert.root, set())


def check_assignment(clauses: Sequence[Clause], assignment: Mapping[Var, Fraction]) -> bool:
    """Every clause has a cube whose atoms all hold exactly."""
    for c in clauses:
        missing = c.variables() - set(assignment)
        if missing:
            raise KeyError(f"assignment misses {sorted(missing)[:3]}")
    return all(c.holds(assignment) for c in clauses)


def violated_clauses(clauses: Sequence[Clause], assignment: Mapping[Var, Fraction]) -> list[str]:
    return [c.name for c in clauses if not c.holds(assignment)]


_FALSE = Atom(LinExpr(), "<", LinExpr())  # 0 < 0


# -- proof scripts -------------------------------------------------------------------


@dataclass
class ProofStep:
    """Facts ``assume`` plus the cited clauses ``use`` should entail every atom of ``claim``.

    ``expect_holds = False`` marks a negative control that must fail.
    """

    name: str
    assume: list[Atom] = field(default_factory=list)
    use: list[str] = field(default_factory=list)
    claim: list[Atom] = field(default_factory=list)
    expect_holds: bool = True


@dataclass
class ClaimResult:
    claim: Atom
    entailed: bool
    certificate: UnsatCertificate | None = None
    witness: dict[Var, Fraction] | None = None
    note: str = ""


@dataclass
class StepResult:
    step: ProofStep
    claims: list[ClaimResult]
    ungrounded: list[Atom]
    seconds: float

    @property
    def holds(self) -> bool:
        return all(c.entailed for c in self.claims)

    @property
    def passed(self) -> bool:
        if self.step.expect_holds:
            return self.holds and not self.ungrounded
        # a negative control fails with a concrete counter-model
        return any(c.witness is not None for c in self.claims)

    @property
    def branches(self) -> int:
        return sum(c.certificate.branches for c in self.claims if c.certificate is not None)


@dataclass
class ReplayReport:
    steps: list[StepResult]

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.steps)

    @property
    def branches(self) -> int:
        return sum(s.branches for s in self.steps)


class UnknownCondition(KeyError):
    pass


def parse_proof_script(text: str) -> list[ProofStep]:
    """Blocks of ``step:``, ``assume:``, ``use:``, ``claim:`` and ``expect:`` lines.

    ``#`` starts a comment, blank lines separate steps, ``use:`` takes names
    separated by commas or spaces, and ``claim: false`` claims a contradiction.
    """
    from .encode import parse_atom

    def atom(s: str) -> Atom:
        return _FALSE if s.strip() == "false" else parse_atom(s)

    steps: list[ProofStep] = []
    cur: ProofStep | None = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            cur = None
            continue
        key, sep, value = line.partition(":")
        key, value = key.strip(), value.strip()
        if not sep:
            raise ValueError(f"line {lineno}: expected 'key: value', got {raw!r}")
        if key == "step" or cur is None:
            cur = ProofStep(value if key == "step" else f"step{len(steps) + 1}")
            steps.append(cur)
            if key == "step":
                continue
        try:
            if key == "assume":
                cur.assume.append(atom(value))
            elif key == "use":
                cur.use.extend(n for n in value.replace(",", " ").split() if n)
            elif key == "claim":
                cur.claim.append(atom(value))
            elif key == "expect":
                if value not in ("holds", "fail"):
                    raise ValueError(f"expect must be 'holds' or 'fail', got {value!r}")
                cur.expect_holds = value == "holds"
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return steps


def _fact_key(a: Atom) -> tuple:
    e, rel, c = a.normal()
    return (e.terms, rel, c)


def _fact_keys(a: Atom) -> set[tuple]:
    keys = {_fact_key(a)}
    if a.rel == "=":
        keys.add(_fact_key(Atom(a.rhs, "=", a.lhs)))
    return keys


def _claim_clause(claim: Atom) -> Clause:
    return Clause("negated_claim", tuple((neg,) for neg in claim.negation()))


def replay_proof(steps: Sequence[ProofStep], system, budget: int = 20_000) -> ReplayReport:
    """Check every step against ``system`` (a ConstraintSystem).

    Each claimed atom is entailed when the assumed facts, the cited clauses and
    the claim's negation are unsatisfiable. Assumptions must repeat claims of
    earlier steps that held, so the steps chain into one derivation.
    """
    established: set[tuple] = set()
    results = []
    for step in steps:
        t0 = time.perf_counter()
        try:
            cited = system.select(step.use)
        except KeyError as exc:
            raise UnknownCondition(f"step {step.name!r}: {exc.args[0]}") from None
        facts = [Clause(f"assume_{i}", ((a,),)) for i, a in enumerate(step.assume)]
        ungrounded = [a for a in step.assume if not _fact_keys(a) & established]
        claims = []
        for claim in step.claim:
            clauses = facts + cited + [_claim_clause(claim)]
            out = check_unsat(clauses, budget=budget)
            if isinstance(out, UnsatCertificate):
                ok = check_certificate(out, clauses)
                claims.append(ClaimResult(claim, ok, out, note="" if ok else "certificate rejected"))
            elif isinstance(out, SatWitness):
                claims.append(ClaimResult(claim, False, witness=out.assignment))
            else:
                claims.append(ClaimResult(claim, False, note=out.reason))
        res = StepResult(step, claims, ungrounded, time.perf_counter() - t0)
        if step.expect_holds and res.holds:
            for c in step.claim:
                established |= _fact_keys(c)
        results.append(res)
    return ReplayReport(results)


def load_proof_script(path=None) -> list[ProofStep]:
    """The bundled appendix derivation unless ``path`` names another script."""
    from pathlib import Path

    if path is None:
        from .appendix import data_dir

        path = data_dir() / "proof.txt"
    return parse_proof_script(Path(path).read_text())
