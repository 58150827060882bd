"""Expand domains from the Example-1 profile under several distance schedules and ask an SMT solver."""
import argparse
import time

from sdsproof.appendix import data_dir
from sdsproof.domain import expand_domain
from sdsproof.encode import build_system
from sdsproof.prefs import read_profile
from sdsproof.smtlib import emit_smtlib
from sdsproof.solver import default_solver, run_solver


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("schedules", nargs="*", default=["1,2,2", "1,2,1,2"])
    ap.add_argument("--seed", default=str(data_dir().parent / "example1.profile"))
    ap.add_argument("--solver", default=default_solver())
    ap.add_argument("--timeout", type=float, default=1800)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    seed = read_profile(args.seed)
    for text in args.schedules:
        schedule = [int(x) for x in text.split(",")]
        g = expand_domain(seed, schedule, threads=args.threads)
        system = build_system(g)
        line = f"{text}: {len(g.profiles)} profiles, {len(g.edges)} edges, {len(system.clauses)} clauses"
        if args.solver is None:
            print(line, "(no solver)")
            continue
        t = time.perf_counter()
        out = run_solver(args.solver, None, emit_smtlib(system), timeout=args.timeout)
        print(f"{line}, {type(out).__name__} in {time.perf_counter() - t:.0f} s", flush=True)


if __name__ == "__main__":
    main()
