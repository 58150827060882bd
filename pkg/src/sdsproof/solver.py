"""Driving an external SMT solver over SMT-LIB text."""
from __future__ import annotations

import os
import shutil
import subprocess
from dataclasses import dataclass, field

ENV_VAR = "SDSPROOF_SOLVER"


@dataclass
class Sat:
    pass


@dataclass
class Unsat:
    core: list[str] | None = None


@dataclass
class Unknown:
    reason: str


@dataclass
class SolverError:
    detail: str


@dataclass
class SolverConfig:
    executable: str
    args: list[str] = field(default_factory=list)
    timeout: float | None = None


def default_solver() -> str | None:
    """``$SDSPROOF_SOLVER`` if set, otherwise ``z3`` found on PATH."""
    path = os.environ.get(ENV_VAR)
    if path:
        return path
    return shutil.which("z3")


def default_args(executable: str) -> list[str]:
    name = os.path.basename(executable)
    if name.startswith("z3"):
        return ["-smt2", "-in"]
    if name.startswith("cvc"):
        return ["--lang", "smt2", "--incremental"]
    return []


def parse_output(text: str, want_core: bool):
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    for i, ln in enumerate(lines):
        if ln in ("sat", "unsat", "unknown"):
            if ln == "sat":
                return Sat()
            if ln == "unknown":
                return Unknown("solver answered unknown")
            core = None
            if want_core:
                rest = " ".join(lines[i + 1:])
                start, end = rest.find("("), rest.find(")")
                if start < 0 or end < start:
                    return SolverError(f"no unsat core in output: {rest[:200]!r}")
                core = rest[start + 1:end].split()
            return Unsat(core)
        if ln.startswith("(error"):
            return SolverError(ln)
    return SolverError(f"no status in solver output: {text[:200]!r}")


def run_solver(executable: str, args: list[str] | None, smt: str, timeout: float | None = None, core: bool = False):
    """Feed ``smt`` to the solver; returns Sat, Unsat(core), Unknown or SolverError."""
    if args is None:
        args = default_args(executable)
    try:
        proc = subprocess.run(
            [executable, *args], input=smt, capture_output=True, text=True, timeout=timeout
        )
    except subprocess.TimeoutExpired:
        return Unknown(f"timeout after {timeout} s")
    except OSError as exc:
        return SolverError(str(exc))
    return parse_output(proc.stdout, core)
