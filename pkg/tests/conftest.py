import json
from pathlib import Path

import pytest

from ethio_eval import harness

FIXTURES = Path(__file__).parent / "fixtures"

_acceptance = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    marker = report.user_properties and dict(report.user_properties).get("acceptance")
    if marker:
        number, title = marker
        prev = _acceptance.get(number, (title, True))
        _acceptance[number] = (title, prev[1] and report.passed)


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("acceptance")
        if m:
            item.user_properties.append(("acceptance", (m.args[0], m.args[1])))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance):
        title, ok = _acceptance[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {title}")


@pytest.fixture(scope="session")
def fixture_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def manifest():
    return harness.load_manifest(FIXTURES / "manifest.jsonl")


@pytest.fixture(scope="session")
def hyps_a():
    return harness.load_hypotheses(FIXTURES / "hyp_a.jsonl")


@pytest.fixture(scope="session")
def hyps_b():
    return harness.load_hypotheses(FIXTURES / "hyp_b.jsonl")


@pytest.fixture(scope="session")
def expected():
    return json.loads((FIXTURES / "expected.json").read_text(encoding="utf-8"))
