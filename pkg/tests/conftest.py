import json
from importlib import resources


def fixture(name: str):
    return json.loads((resources.files("zident") / "data" / name).read_text())


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    lines = test_acceptance.report()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
