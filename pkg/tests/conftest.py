import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_ACCEPTANCE: dict[int, list[tuple[str, str]]] = {}


@pytest.fixture
def acceptance():
    """Record an acceptance line: acceptance(criterion, passed, detail)."""

    def record(criterion: int, passed: bool, detail: str = ""):
        status = "PASS" if passed else "FAIL"
        _ACCEPTANCE.setdefault(criterion, []).append((status, detail))
        print(f"criterion {criterion}: {status} {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(_ACCEPTANCE):
        parts = _ACCEPTANCE[c]
        status = "PASS" if all(s == "PASS" for s, _ in parts) else "FAIL"
        detail = "; ".join(d for _, d in parts if d)
        terminalreporter.write_line(f"criterion {c}: {status}  {detail}")
