from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sdsproof.appendix import appendix_system, load_appendix  # noqa: E402
from sdsproof.prefs import profile_from_strings  # noqa: E402
from sdsproof.solver import default_solver  # noqa: E402

EXAMPLE1 = ("{a,c},{b,d}", "{b,d},{a,c}", "{a,d},b,c", "{b,c},a,d")


@pytest.fixture(scope="session")
def example1():
    return profile_from_strings(EXAMPLE1)


@pytest.fixture(scope="session")
def appendix():
    return load_appendix()


@pytest.fixture(scope="session")
def appendix_sys(appendix):
    return appendix_system(appendix)


@pytest.fixture(scope="session")
def solver_path():
    path = default_solver()
    if path is None:
        pytest.skip("no SMT solver configured (set SDSPROOF_SOLVER or put z3 on PATH)")
    return path


@pytest.fixture(scope="session")
def solver_path_optional():
    return default_solver()


@pytest.fixture(scope="session")
def appendix_certificate(appendix_sys):
    """The built-in unsatisfiability proof of the appendix system (about half a minute)."""
    from sdsproof.verify import check_unsat

    return check_unsat(appendix_sys.clauses)


def pytest_terminal_summary(terminalreporter):
    from criteria import summary_lines

    lines = summary_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
