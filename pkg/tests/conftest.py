import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ptacl.lang import parse_document  # noqa: E402

RUNNING_EXAMPLE = """\
t1 :: (Tatom "nat" "AT")
p1 : Pnot (Pdbd (Pnot (Ptar t1 (Patom Zero))))
t2 :: (Tatom "nat" "FR")
p2 : Pdbd (Ptar t2 (Patom One))
"""

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def env():
    return parse_document(RUNNING_EXAMPLE)


@pytest.fixture
def example_file(tmp_path):
    path = tmp_path / "example.ptacl"
    path.write_text(RUNNING_EXAMPLE)
    return path


_acceptance_lines: list[str] = []


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    label = next((v for k, v in report.user_properties if k == "criterion"), None)
    if label is not None:
        _acceptance_lines.append(f"{'PASS' if report.passed else 'FAIL'}  {label}")


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
