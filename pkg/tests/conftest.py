import pytest

from screenlab import TestCharacteristics

# criterion number -> list of (description, passed)
_ACCEPTANCE: dict[int, list[tuple[str, bool]]] = {}


@pytest.fixture
def fig1_test():
    return TestCharacteristics(0.85, 0.90)


@pytest.fixture
def criterion(request):
    """Record acceptance outcomes; ``criterion(n, text)`` returns a recorder."""

    def start(number: int, text: str):
        entry = [text, False]
        _ACCEPTANCE.setdefault(number, []).append(entry)

        def done():
            entry[1] = True

        return done

    return start


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        entries = _ACCEPTANCE[number]
        ok = all(passed for _, passed in entries)
        failing = [text for text, passed in entries if not passed]
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: " + "; ".join(
            text for text, _ in entries
        )
        terminalreporter.write_line(line)
        for text in failing:
            terminalreporter.write_line(f"        failed: {text}")
