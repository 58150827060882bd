"""One pass/fail line per acceptance criterion, printed at the end of the pytest run."""
from __future__ import annotations

import time
from contextlib import contextmanager

import pytest

RESULTS: dict[str, tuple[str, str, str]] = {}  # id -> (status, title, detail)


@contextmanager
def criterion(cid: str, title: str):
    """Record the outcome of the enclosed checks; ``note`` collects detail text."""
    note: list[str] = []
    start = time.perf_counter()
    try:
        yield note
    except pytest.skip.Exception as exc:
        RESULTS[cid] = ("SKIP", title, str(exc))
        raise
    except BaseException as exc:
        detail = "; ".join(note + [f"{type(exc).__name__}: {exc}".splitlines()[0]])
        RESULTS[cid] = ("FAIL", title, detail)
        raise
    note.append(f"{time.perf_counter() - start:.1f} s")
    RESULTS[cid] = ("PASS", title, "; ".join(note))


def summary_lines() -> list[str]:
    def key(cid):
        digits = "".join(ch for ch in cid if ch.isdigit())
        return int(digits), cid

    return [f"{status} criterion {cid:<3} {title} ({detail})" for cid, (status, title, detail) in
            sorted(RESULTS.items(), key=lambda kv: key(kv[0]))]
