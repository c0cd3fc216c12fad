import sys

import pytest

from sheetlytics import demo_workbook, load_workbook


@pytest.fixture
def demo():
    return demo_workbook()


def irr_workbook():
    """Cash flows -1000, 2300, -1320: NPV is zero at 10% and 20%."""
    return load_workbook(
        """
        [cells]
        A1: 0.05
        B1: -1000
        B2: 2300
        B3: -1320
        C1: =B1 + NPV(A1, B2:B3)
        [roles]
        decision A1 "Rate"
        data B1
        data B2
        data B3
        performance C1 "NPV"
        """
    )


@pytest.fixture
def irr():
    return irr_workbook()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)


def fingerprint(wb):
    """Bitwise state: every cell's content plus every value, floats as hex."""
    def enc(v):
        return float.hex(v) if isinstance(v, float) and not isinstance(v, bool) else repr(v)

    contents = {str(a): repr(c) for a, c in wb.cells.items()}
    values = {str(a): enc(v) for a, v in wb.values().items()}
    return contents, values
