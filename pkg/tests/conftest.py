import time
from contextlib import contextmanager

import pytest

_LINES: list[str] = []


class _Outcome:
    def __init__(self):
        self.detail = ""


@contextmanager
def _criterion(number: int, title: str, budget_s: float):
    """Record one PASS/FAIL line; a blown runtime budget also fails."""
    outcome = _Outcome()
    start = time.perf_counter()
    try:
        yield outcome
    except BaseException as exc:
        elapsed = time.perf_counter() - start
        _LINES.append(f"FAIL  {number:>2}. {title} ({elapsed:.2f} s): {type(exc).__name__}: {exc}")
        raise
    elapsed = time.perf_counter() - start
    ok = elapsed < budget_s
    status = "PASS" if ok else "FAIL"
    note = "" if ok else f" over budget {budget_s} s"
    _LINES.append(f"{status}  {number:>2}. {title} ({elapsed:.2f} s{note}) {outcome.detail}".rstrip())
    assert ok, f"criterion {number} took {elapsed:.2f} s, budget {budget_s} s"


@pytest.fixture
def criterion():
    return _criterion


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s[6:8])):
            terminalreporter.write_line(line)
