"""RSD against every constraint of the full canonical domain (default m=3, n=4)."""
import sys
import time

from sdsproof.domain import full_domain
from sdsproof.encode import build_system, sds_assignment
from sdsproof.lottery import rsd
from sdsproof.verify import check_assignment, violated_clauses

m, n = (int(x) for x in sys.argv[1:3]) if len(sys.argv) > 2 else (3, 4)
t = time.perf_counter()
g = full_domain(m, n)
system = build_system(g)
x = sds_assignment(g, rsd)
bad = violated_clauses(system.clauses, x)
print(f"m={m} n={n}: {len(g.profiles)} profiles, {len(g.edges)} edges, {len(system.clauses)} clauses,"
      f" {len(bad)} violated ({time.perf_counter() - t:.1f} s)")
for name in bad[:20]:
    print("  ", name)
raise SystemExit(0 if check_assignment(system.clauses, x) else 1)
