import time

import pytest

SUITE_BUDGET_S = 600.0
_results: list[str] = []
_start = time.perf_counter()


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion; the line is printed even when captured."""

    def record(label: str, ok, detail: str):
        status = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
        line = f"{label} {status}: {detail}"
        _results.append(line)
        print(line)
        return ok

    return record


def pytest_sessionfinish(session, exitstatus):
    elapsed = time.perf_counter() - _start
    ok = elapsed < SUITE_BUDGET_S
    if any(line.startswith("AC10") for line in _results):
        _results.append(f"AC10 {'PASS' if ok else 'FAIL'}: full suite wall time "
                        f"{elapsed:.1f} s (budget {SUITE_BUDGET_S:.0f} s)")
        if not ok:
            session.exitstatus = 1


def pytest_terminal_summary(terminalreporter):
    if _results:
        terminalreporter.section("acceptance criteria")
        for line in _results:
            terminalreporter.write_line(line)
