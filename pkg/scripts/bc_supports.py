"""Which appendix profiles have {b,c} as a minimal inefficient support, and what dominates 1/2 b + 1/2 c there."""
from sdsproof.appendix import load_appendix
from sdsproof.efficiency import is_efficient_lottery, minimal_inefficient_supports
from sdsproof.lottery import Lottery

data = load_appendix()
half_bc = Lottery.uniform({1, 2}, 4)
for pid, r in data.profiles.items():
    if frozenset({1, 2}) in minimal_inefficient_supports(r):
        _, q = is_efficient_lottery(r, half_bc)
        print(f"{pid:<4} dominated by {q}")
