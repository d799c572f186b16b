from __future__ import annotations

import pytest

_RESULTS = pytest.StashKey[dict]()


class AcceptanceLog:
    """Collects one PASS/FAIL line per acceptance criterion."""

    def __init__(self, results: dict) -> None:
        self.results = results

    def check(self, number: int, title: str):
        log = self

        class _Scope:
            def __enter__(self):
                return self

            def __exit__(self, exc_type, exc, tb):
                status = "PASS" if exc_type is None else "FAIL"
                log.results[number] = f"criterion {number:2d} {status}  {title}"
                return False

        return _Scope()


@pytest.fixture
def acceptance(request) -> AcceptanceLog:
    return AcceptanceLog(request.config.stash.setdefault(_RESULTS, {}))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_RESULTS, {})
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
