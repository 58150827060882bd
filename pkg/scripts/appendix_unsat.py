"""Certified unsatisfiability of the bundled appendix system, optionally cross-checked by an SMT solver."""
import argparse
import time

from sdsproof.appendix import appendix_system
from sdsproof.smtlib import emit_smtlib
from sdsproof.solver import default_solver, run_solver
from sdsproof.verify import UnsatCertificate, check_certificate, check_unsat


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--solver", default=default_solver())
    ap.add_argument("--no-solver", action="store_true")
    args = ap.parse_args()

    system = appendix_system()
    print(f"{len(system.clauses)} clauses")
    out = check_unsat(system.clauses)
    if not isinstance(out, UnsatCertificate):
        print("built-in checker: satisfiable", out)
        return 1
    t = time.perf_counter()
    ok = check_certificate(out, system.clauses)
    print(f"built-in: unsat, {out.branches} leaves, {out.cuts()} cuts, {out.seconds:.1f} s;"
          f" certificate {'valid' if ok else 'INVALID'} ({time.perf_counter() - t:.1f} s to check)")
    if args.solver and not args.no_solver:
        res = run_solver(args.solver, None, emit_smtlib(system, named=True), timeout=600, core=True)
        print(f"{args.solver}: {type(res).__name__}", f"core of {len(res.core)}" if getattr(res, "core", None) else "")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
