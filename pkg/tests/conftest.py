from collections import defaultdict

import pytest

ACCEPTANCE = defaultdict(list)


@pytest.fixture
def record():
    """record(k, ok, detail): register one check under acceptance criterion k."""

    def _record(k, ok, detail):
        ACCEPTANCE[k].append((bool(ok), detail))
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[k]
        status = "PASS" if all(ok for ok, _ in checks) else "FAIL"
        details = "; ".join(("" if ok else "[fail] ") + d for ok, d in checks)
        terminalreporter.write_line(f"CRITERION {k}: {status} - {details}")
