import pytest

_RESULTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def record():
    """record(number, passed, detail) -> passed; feeds the acceptance summary."""

    def _record(number: int, passed: bool, detail: str) -> bool:
        _RESULTS[number] = (bool(passed), detail)
        print(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
        return bool(passed)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        ok, detail = _RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
