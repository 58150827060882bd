"""Command-line entry point: ``sdsproof <subcommand> [options]``.

Exit codes: 0 success, 1 negative verification outcome, 2 usage or input
error, 3 external solver failure. ``--json`` prints one RunReport object on
stdout; progress goes to stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__

OK, NEGATIVE, USAGE, SOLVER_FAILURE = 0, 1, 2, 3


@dataclass
class RunReport:
    command: str
    parameters: dict
    seconds: float = 0.0
    status: str = "ok"
    exit_code: int = OK
    result: dict = field(default_factory=dict)
    text: list[str] = field(default_factory=list)  # human-readable lines

    def to_json(self) -> str:
        data = asdict(self)
        del data["text"]
        return json.dumps(data, indent=2, sort_keys=True)


class UsageError(Exception):
    pass


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def _schedule(text: str) -> tuple[int, ...]:
    try:
        ks = tuple(int(s) for s in text.replace(" ", "").split(",") if s)
    except ValueError:
        raise UsageError(f"bad schedule {text!r}; expected e.g. 1,2,1,2") from None
    if not ks or any(k < 0 for k in ks):
        raise UsageError(f"bad schedule {text!r}")
    return ks


def _profile(path: str):
    from .prefs import ParseError, read_profile

    try:
        return read_profile(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except ParseError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _system(args):
    """Constraint system from --appendix, a dataset directory, a domain file, an
    SMT-LIB file, or --seed with --schedule."""
    from .appendix import appendix_system, load_appendix
    from .domain import expand_domain, parse_domain
    from .encode import ConstraintSystem, build_system
    from .smtlib import read_smtlib

    source = getattr(args, "source", None)
    if getattr(args, "seed", None):
        g = expand_domain(_profile(args.seed), _schedule(args.schedule), threads=args.threads)
        _progress(f"domain: {len(g.profiles)} profiles, {len(g.edges)} edges")
        desc = f"seed {g.seed.key()} schedule {','.join(map(str, g.schedule))}"
        return build_system(g, descriptor=desc)
    if getattr(args, "appendix", False) or source is None:
        return appendix_system()
    path = Path(source)
    if path.is_dir():
        return appendix_system(load_appendix(path))
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {source}: {exc.strerror}") from None
    if path.suffix == ".smt2":
        _, clauses = read_smtlib(text)
        return ConstraintSystem(0, 0, clauses, {}, f"read from {path.name}")
    try:
        g = parse_domain(text)
    except (ValueError, KeyError, IndexError) as exc:
        raise UsageError(f"{source}: not a domain file ({exc})") from None
    return build_system(g, descriptor=f"domain file {path.name}")


# -- subcommands ---------------------------------------------------------------


def cmd_enumerate(args, rep: RunReport) -> None:
    from .prefs import enumerate_weak_orders, format_weak_order

    ms = range(1, args.m + 1) if args.upto else [args.m]
    counts = {}
    for m in ms:
        orders = enumerate_weak_orders(m)
        counts[str(m)] = len(orders)
        rep.text.append(f"m={m}: {len(orders)} weak orders")
        if args.list:
            rep.text += ["  " + format_weak_order(r) for r in orders]
    rep.result["counts"] = counts
    if args.list:
        rep.result["orders"] = [format_weak_order(r) for r in enumerate_weak_orders(args.m)]


def cmd_canon(args, rep: RunReport) -> None:
    from .canon import canonical_count, canonicalize, count_anonymous_profiles
    from .prefs import format_profile

    if args.count:
        _progress(f"enumerating canonical profiles for m={args.m}, n={args.n}")
        c = canonical_count(args.m, args.n)
        rep.result.update(m=args.m, n=args.n, canonical=c, anonymous=count_anonymous_profiles(args.m, args.n))
        rep.text.append(str(c))
        return
    if not args.profile:
        raise UsageError("canon needs a profile file or --count")
    r = _profile(args.profile)
    c = canonicalize(r)
    rep.result.update(key=c.key(), witness=str(c.witness), profile=format_profile(c.anon.to_profile()).splitlines())
    rep.text.append(f"canonical key {c.key()} via {c.witness}")
    rep.text += format_profile(c.anon.to_profile()).splitlines()


def cmd_orbits(args, rep: RunReport) -> None:
    from .canon import anonymize, automorphisms, orbits
    from .prefs import alt_name

    r = anonymize(_profile(args.profile))
    obs = [sorted(alt_name(x) for x in o) for o in orbits(r)]
    autos = [str(p) for p in automorphisms(r) if not p.is_identity()]
    rep.result.update(orbits=obs, automorphisms=autos)
    rep.text.append("orbits: " + " ".join("{" + ",".join(o) + "}" for o in obs))
    rep.text.append("automorphisms: " + (", ".join(autos) if autos else "identity only"))


def cmd_eff(args, rep: RunReport) -> None:
    from .efficiency import is_efficient_lottery, minimal_inefficient_supports, pareto_dominated_alternatives
    from .lottery import expected_utility, format_lottery, parse_lottery, sample_consistent_utility, sd_geq
    from .prefs import ParseError, alt_name

    r = _profile(args.profile)
    dominated = sorted(alt_name(x) for x in pareto_dominated_alternatives(r))
    supports = ["".join(sorted(alt_name(x) for x in s)) for s in minimal_inefficient_supports(r)]
    rep.result.update(pareto_dominated=dominated, minimal_inefficient_supports=supports)
    rep.text.append("Pareto dominated: " + (", ".join(dominated) or "none"))
    rep.text.append("minimal inefficient supports: " + (", ".join("{" + ",".join(s) + "}" for s in supports) or "none"))
    if args.lottery is None:
        return
    try:
        p = parse_lottery(args.lottery, r.m)
    except ParseError as exc:
        raise UsageError(str(exc)) from None
    if sum(p.probs) != 1:
        raise UsageError(f"lottery {args.lottery!r} does not sum to one")
    ok, dom = is_efficient_lottery(r, p)
    info = {"lottery": format_lottery(p), "efficient": ok}
    if dom is not None:
        info["dominator"] = format_lottery(dom)
        info["sd_weak_for_all"] = all(sd_geq(dom, p, o) for o in r.orders)
        # expected-utility gains under sampled consistent utilities
        gains = []
        for i, order in enumerate(r.orders):
            u = sample_consistent_utility(order, args.seed_rng + i)
            gains.append(str(expected_utility(u, dom) - expected_utility(u, p)))
        info["utility_gains"] = gains
        info["seed_rng"] = args.seed_rng
    rep.result["lottery"] = info
    line = f"{info['lottery']}: " + ("efficient" if ok else f"SD-dominated by {info['dominator']}")
    rep.text.append(line)


def cmd_rsd(args, rep: RunReport) -> None:
    from .lottery import format_lottery, rsd

    p = rsd(_profile(args.profile))
    rep.result["lottery"] = format_lottery(p)
    rep.result["probabilities"] = [str(v) for v in p.probs]
    rep.text.append(format_lottery(p))


def cmd_expand(args, rep: RunReport) -> None:
    from .domain import expand_domain, format_domain

    ks = _schedule(args.schedule)
    g = expand_domain(_profile(args.seed), ks, threads=args.threads)
    levels = [g.levels.count(t) for t in range(len(ks) + 1)]
    rep.result.update(profiles=len(g.profiles), edges=len(g.edges), level_sizes=levels)
    if args.out:
        Path(args.out).write_text(format_domain(g))
        rep.result["out"] = args.out
    rep.text.append(f"{len(g.profiles)} profiles, {len(g.edges)} edges, level sizes {levels}")
    if args.out:
        rep.text.append(f"written to {args.out}")


def cmd_encode(args, rep: RunReport) -> None:
    from .smtlib import emit_smtlib

    system = _system(args)
    smt = emit_smtlib(system, named=args.named)
    fam = {}
    for c in system.clauses:
        fam[c.name[0]] = fam.get(c.name[0], 0) + 1
    rep.result.update(clauses=len(system.clauses), variables=len(system.variables), by_family=fam)
    if args.out:
        Path(args.out).write_text(smt)
        rep.result["out"] = args.out
        rep.text.append(f"{len(system.clauses)} clauses over {len(system.variables)} variables written to {args.out}")
    else:
        rep.text.append(smt.rstrip("\n"))


def cmd_solve(args, rep: RunReport) -> None:
    from .smtlib import emit_smtlib
    from .solver import Sat, SolverError, Unknown, Unsat, default_solver, run_solver

    exe = args.solver or default_solver()
    if not exe:
        rep.status, rep.exit_code = "no solver", SOLVER_FAILURE
        rep.text.append("no SMT solver configured (set SDSPROOF_SOLVER or put z3 on PATH)")
        return
    if args.source and args.source.endswith(".smt2") and not args.core:
        smt = Path(args.source).read_text()
    else:
        smt = emit_smtlib(_system(args), named=args.core)
    out = run_solver(exe, None, smt, timeout=args.timeout, core=args.core)
    rep.result["solver"] = exe
    if isinstance(out, Unsat):
        rep.status = "unsat"
        if out.core is not None:
            rep.result["core"] = out.core
            rep.result["core_size"] = len(out.core)
    elif isinstance(out, Sat):
        rep.status = "sat"
    elif isinstance(out, Unknown):
        rep.status, rep.exit_code = "unknown", SOLVER_FAILURE
        rep.result["reason"] = out.reason
    elif isinstance(out, SolverError):
        rep.status, rep.exit_code = "error", SOLVER_FAILURE
        rep.result["reason"] = out.detail
    if args.expect and rep.exit_code == OK and rep.status != args.expect:
        rep.exit_code = NEGATIVE
    rep.text.append(rep.status + (f" (core of {len(out.core)})" if isinstance(out, Unsat) and out.core else ""))


def cmd_verify_unsat(args, rep: RunReport) -> None:
    from .verify import SatWitness, UnsatCertificate, check_certificate, check_unsat

    system = _system(args)
    _progress(f"checking {len(system.clauses)} clauses")
    out = check_unsat(system.clauses, budget=args.budget)
    if isinstance(out, UnsatCertificate):
        ok = check_certificate(out, system.clauses)
        rep.status = "Unsat" if ok else "certificate rejected"
        rep.exit_code = OK if ok else NEGATIVE
        rep.result.update(
            branches=out.branches, cuts=out.cuts(), clauses_used=len(out.clauses_used()),
            farkas_certificates=len(out.leaf_certificates()), certificate_checked=ok, search_seconds=out.seconds,
        )
        rep.text.append(f"{rep.status}: {out.branches} branches, {out.cuts()} cuts, "
                        f"{len(out.clauses_used())} clauses used, certificate {'valid' if ok else 'INVALID'}")
    elif isinstance(out, SatWitness):
        rep.status, rep.exit_code = "Sat", NEGATIVE
        rep.result["assignment_size"] = len(out.assignment)
        rep.text.append(f"Sat: witness assigns {len(out.assignment)} variables")
    else:
        rep.status, rep.exit_code = "Inconclusive", NEGATIVE
        rep.result.update(reason=out.reason, branches=out.branches)
        rep.text.append(f"Inconclusive: {out.reason}")


def cmd_verify_appendix(args, rep: RunReport) -> None:
    from .appendix import appendix_system
    from .verify import UnknownCondition, load_proof_script, replay_proof

    try:
        steps = load_proof_script(args.script)
    except OSError as exc:
        raise UsageError(f"cannot read {args.script}: {exc.strerror}") from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        report = replay_proof(steps, appendix_system())
    except UnknownCondition as exc:
        raise UsageError(exc.args[0]) from None
    rows = []
    width = max(len(s.step.name) for s in report.steps)
    for s in report.steps:
        verdict = "pass" if s.passed else "FAIL"
        kind = "control" if not s.step.expect_holds else "step"
        rows.append({"step": s.step.name, "passed": s.passed, "kind": kind, "claims": len(s.claims),
                     "entailed": sum(c.entailed for c in s.claims), "branches": s.branches,
                     "ungrounded": [str(a) for a in s.ungrounded]})
        rep.text.append(f"{verdict}  {s.step.name:<{width}}  {kind:<7} {rows[-1]['entailed']}/{len(s.claims)} claims")
    passed = sum(r["passed"] for r in rows)
    rep.result.update(steps=rows, passed=passed, total=len(rows), branches=report.branches)
    rep.text.append(f"{passed}/{len(rows)} steps pass, {report.branches} branches in total")
    rep.status = "pass" if report.passed else "fail"
    rep.exit_code = OK if report.passed else NEGATIVE


def cmd_check_rsd(args, rep: RunReport) -> None:
    from .appendix import load_appendix
    from .domain import full_domain, parse_domain
    from .encode import build_system, sds_assignment
    from .lottery import rsd
    from .verify import check_assignment, violated_clauses

    if args.domain:
        g = parse_domain(Path(args.domain).read_text())
    elif args.appendix:
        g = load_appendix()
    else:
        _progress(f"building the full canonical domain for m={args.m}, n={args.n}")
        g = full_domain(args.m, args.n, threads=args.threads)
    system = build_system(g)
    w = sds_assignment(g, rsd)
    ok = check_assignment(system.clauses, w)
    bad = [] if ok else violated_clauses(system.clauses, w)
    rep.result.update(clauses=len(system.clauses), satisfied=ok, violated=bad[:50], violated_count=len(bad))
    rep.status = "satisfied" if ok else "violated"
    rep.exit_code = OK if ok else NEGATIVE
    rep.text.append(f"RSD {'satisfies' if ok else 'violates'} the {len(system.clauses)} clauses"
                    + ("" if ok else f" ({len(bad)} violated, e.g. {', '.join(bad[:5])})"))


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    def global_flags(top: bool) -> argparse.ArgumentParser:
        # flags are accepted before and after the subcommand; only the top level sets defaults
        g = argparse.ArgumentParser(add_help=False)
        kw = {} if top else {"default": argparse.SUPPRESS}
        g.add_argument("--json", action="store_true", help="print a JSON RunReport", **kw)
        g.add_argument("--threads", type=int, help="worker processes (default 1)", **({"default": 1} | kw))
        g.add_argument("--seed-rng", type=int, help="seed for sampled utilities (default 0)", **({"default": 0} | kw))
        return g

    common = global_flags(top=False)
    p = argparse.ArgumentParser(prog="sdsproof", description=__doc__.splitlines()[0], parents=[global_flags(top=True)])
    p.add_argument("--version", action="version", version=f"sdsproof {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_, parents=[common])
        sp.set_defaults(func=fn)
        return sp

    def add_source(sp):
        sp.add_argument("source", nargs="?", help="dataset directory, domain file or .smt2 file (default: bundled appendix)")
        sp.add_argument("--appendix", action="store_true", help="use the bundled appendix dataset")
        sp.add_argument("--seed", help="seed profile file; expand a domain with --schedule")
        sp.add_argument("--schedule", default="1,2,1,2", help="Kendall distances per BFS level (default 1,2,1,2)")

    sp = add("enumerate", cmd_enumerate, "count weak orders")
    sp.add_argument("-m", type=int, default=4)
    sp.add_argument("--upto", action="store_true", help="every m from 1 to -m")
    sp.add_argument("--list", action="store_true", help="list the orders")

    sp = add("canon", cmd_canon, "canonicalize a profile file or count canonical profiles")
    sp.add_argument("profile", nargs="?")
    sp.add_argument("--count", action="store_true")
    sp.add_argument("-m", type=int, default=4)
    sp.add_argument("-n", type=int, default=4)

    sp = add("orbits", cmd_orbits, "orbits and automorphisms of a profile")
    sp.add_argument("profile")

    sp = add("eff", cmd_eff, "Pareto dominance, inefficient supports, lottery efficiency")
    sp.add_argument("profile")
    sp.add_argument("--lottery", help="e.g. '1/2*a + 1/2*b'")

    sp = add("rsd", cmd_rsd, "random serial dictatorship lottery")
    sp.add_argument("profile")

    sp = add("expand", cmd_expand, "breadth-first manipulation domain")
    sp.add_argument("--seed", required=True)
    sp.add_argument("--schedule", default="1,2,1,2")
    sp.add_argument("--out")

    sp = add("encode", cmd_encode, "emit SMT-LIB for a constraint system")
    add_source(sp)
    sp.add_argument("--named", action="store_true", help="name assertions and ask for an unsat core")
    sp.add_argument("--out")

    sp = add("solve", cmd_solve, "run an external SMT solver")
    add_source(sp)
    sp.add_argument("--solver", help="solver executable (default $SDSPROOF_SOLVER or z3)")
    sp.add_argument("--timeout", type=float)
    sp.add_argument("--core", action="store_true", help="request an unsat core")
    sp.add_argument("--expect", choices=["sat", "unsat"], help="exit 1 unless the answer matches")

    sp = add("verify-unsat", cmd_verify_unsat, "built-in certified unsatisfiability check")
    add_source(sp)
    sp.add_argument("--budget", type=int, default=100_000, help="branch budget")

    sp = add("verify-appendix", cmd_verify_appendix, "replay the step-by-step appendix derivation")
    sp.add_argument("--script", help="proof script (default: bundled)")

    sp = add("check-rsd", cmd_check_rsd, "check RSD against every generated constraint")
    sp.add_argument("--domain", help="domain file (default: full canonical domain for -m/-n)")
    sp.add_argument("--appendix", action="store_true")
    sp.add_argument("-m", type=int, default=3)
    sp.add_argument("-n", type=int, default=4)
    return p


def dispatch(argv: list[str] | None = None) -> tuple[int, RunReport | None]:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return (exc.code if isinstance(exc.code, int) else USAGE), None
    params = {k: v for k, v in vars(args).items() if k not in ("func",)}
    rep = RunReport(args.command, params)
    start = time.perf_counter()
    try:
        if args.threads < 1:
            raise UsageError("--threads must be at least 1")
        args.func(args, rep)
    except UsageError as exc:
        rep.status, rep.exit_code = "usage error", USAGE
        rep.result["error"] = str(exc)
        rep.text.append(f"error: {exc}")
    rep.seconds = time.perf_counter() - start
    return rep.exit_code, rep


def main(argv: list[str] | None = None) -> int:
    code, rep = dispatch(argv)
    if rep is not None:
        if rep.parameters.get("json"):
            print(rep.to_json())
        else:
            stream = sys.stderr if rep.exit_code == USAGE else sys.stdout
            for line in rep.text:
                print(line, file=stream)
    return code


if __name__ == "__main__":
    sys.exit(main())
