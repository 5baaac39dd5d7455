import pytest

from mertens_ising import _accel

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture(params=["numba", "numpy"])
def backend(request, monkeypatch):
    """Run a test once per kernel backend."""
    if request.param == "numba" and not _accel.HAVE_NUMBA:
        pytest.skip("numba not installed")
    monkeypatch.setattr(_accel, "USE_NUMBA", request.param == "numba")
    return request.param


@pytest.fixture
def acceptance():
    """Record one acceptance line: acceptance(tag, passed, detail)."""

    def record(tag: str, passed: bool, detail: str) -> None:
        _ACCEPTANCE.append((tag, bool(passed), detail))

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for tag, passed, detail in sorted(_ACCEPTANCE, key=lambda r: int(r[0].lstrip("AC").split(".")[0])):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {tag}  {detail}")
