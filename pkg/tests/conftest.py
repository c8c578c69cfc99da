import pytest

_CRITERIA: list[tuple[int, str, bool, str, float]] = []


class CriterionRecorder:
    def __init__(self, store):
        self._store = store

    def __call__(self, number: int, title: str, passed: bool, detail: str, seconds: float) -> None:
        self._store.append((number, title, bool(passed), detail, seconds))
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {title}  [{detail}; {seconds:.2f} s]")


@pytest.fixture
def criterion():
    return CriterionRecorder(_CRITERIA)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail, seconds in sorted(_CRITERIA):
        terminalreporter.write_line(
            f"{'PASS' if passed else 'FAIL'}  {number}. {title}  [{detail}; {seconds:.2f} s]"
        )
