"""Bundled appendix dataset: the 47 profiles, their automorphisms and manipulation rows."""
from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .canon import anonymize, canonicalize
from .domain import replace_one
from .encode import Clause, ConstraintSystem, SpEdge, build_system, parse_clause_text
from .prefs import (
    Permutation,
    Profile,
    WeakOrder,
    apply_permutation,
    parse_weak_order,
)


@dataclass(frozen=True)
class ManipulationRow:
    name: str
    source: str
    target: str
    agent: int  # 1-based position in the printed profile
    truthful: WeakOrder
    misreport: WeakOrder
    map: Permutation

    def edge(self) -> SpEdge:
        return SpEdge(self.name, self.source, self.truthful, self.target, self.map)


@dataclass
class AppendixData:
    profiles: dict[str, Profile]
    automorphisms: dict[str, Permutation]
    rows: list[ManipulationRow]
    conditions: dict[str, str] = field(default_factory=dict)  # printed condition text

    m = 4
    n = 4

    def labeled_profiles(self) -> list[tuple[str, Profile]]:
        return list(self.profiles.items())

    def sp_edges(self) -> list[SpEdge]:
        return [r.edge() for r in self.rows]

    def printed_clause(self, name: str) -> Clause:
        return parse_clause_text(name, self.conditions[name])


def data_dir() -> Path:
    return Path(str(resources.files("sdsproof") / "data" / "appendix"))


def _records(path: Path, sep: str):
    for line in path.read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            head, _, rest = line.partition(sep)
            yield head.strip(), rest.strip()


def load_appendix(path: str | Path | None = None) -> AppendixData:
    root = Path(path) if path is not None else data_dir()
    profiles = {}
    for pid, rest in _records(root / "profiles.txt", ":"):
        profiles[pid] = Profile(tuple(parse_weak_order(s.strip(), 4) for s in rest.split("|")))
    autos = {pid: Permutation.from_cycles(cyc, 4) for pid, cyc in _records(root / "automorphisms.txt", ":")}
    rows = []
    for line in (root / "manipulations.txt").read_text().splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        name, src, tgt, agent, tru, mis, cyc = (f.strip() for f in line.split("|"))
        rows.append(
            ManipulationRow(
                name, src, tgt, int(agent), parse_weak_order(tru, 4), parse_weak_order(mis, 4),
                Permutation.from_cycles(cyc, 4),
            )
        )
    conditions = dict(_records(root / "conditions.txt", ":")) if (root / "conditions.txt").exists() else {}
    return AppendixData(profiles, autos, rows, conditions)


def check_row(data: AppendixData, row: ManipulationRow) -> list[str]:
    """Problems with one manipulation row (empty list when it checks out)."""
    problems = []
    src = data.profiles[row.source]
    if src[row.agent - 1] != row.truthful:
        problems.append(f"agent {row.agent} of {row.source} does not hold {row.truthful}")
        return problems
    manipulated = replace_one(anonymize(src), row.truthful, row.misreport)
    if apply_permutation(manipulated, row.map) != anonymize(data.profiles[row.target]):
        problems.append(f"permutation {row.map} does not map the manipulated profile onto {row.target}")
    if canonicalize(manipulated).anon != canonicalize(data.profiles[row.target]).anon:
        problems.append(f"manipulated profile is not in the class of {row.target}")
    return problems


def appendix_system(data: AppendixData | None = None) -> ConstraintSystem:
    """Lottery, orbit, efficiency (computed) and the tabulated SP conditions over the 47 profiles."""
    data = data or load_appendix()
    return build_system(data, descriptor="appendix: 47 profiles, tabulated manipulations")
