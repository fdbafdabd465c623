import pytest

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def record(number, passed, detail):
    """Accumulate a result; a criterion passes only if all its parts do."""
    ok, text = ACCEPTANCE.get(number, (True, ""))
    ACCEPTANCE[number] = (ok and bool(passed), f"{text}; {detail}" if text else detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def octant():
    from curvebill import make_family
    return make_family("octant_s2")
