import pytest

from sftescape import analyze, build_transfer, three_symbol_example

_criteria: dict[str, dict] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or (rep.when != "call" and rep.passed):
        return
    number, title = marker.args
    entry = _criteria.setdefault(number, {"title": title, "passed": True, "tests": 0})
    if rep.when == "call":
        entry["tests"] += 1
    if rep.failed:
        entry["passed"] = False


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria, key=lambda s: int(s)):
        entry = _criteria[number]
        verdict = "PASS" if entry["passed"] else "FAIL"
        terminalreporter.write_line(
            f"{verdict}  criterion {number}: {entry['title']} ({entry['tests']} tests)"
        )


@pytest.fixture(scope="session")
def example():
    return three_symbol_example()


@pytest.fixture(scope="session")
def example_analysis(example):
    model, potential, delta = example
    return analyze(model, potential, delta)


@pytest.fixture(scope="session")
def example_13(example):
    model, potential, _ = example
    return analyze(model, potential, ("1", "3"))


@pytest.fixture(scope="session")
def example_transfer(example):
    model, potential, _ = example
    return build_transfer(model, potential)
