import pytest

#: filled by tests/test_acceptance.py: criterion number -> (passed, seconds, limit, title)
ACCEPTANCE: dict[int, tuple[bool, float, float, str]] = {}


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        passed, secs, limit, title = ACCEPTANCE[n]
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"AC{n:<2} {verdict}  {secs:8.2f}s / {limit:g}s  {title}")
