import pytest

from rvmfp.config import SimConfig

ACCEPTANCE_LINES = {}


def record_criterion(number, title, passed, detail):
    line = f"criterion {number:>2} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture
def small_config():
    """A cheap coupled configuration: 32 x-cells, 16^2 momentum cells, four steps."""
    return SimConfig().with_(
        grid={"nx": 32, "nv": 16, "v_max": 8.0},
        time={"T": 4 * 4.0 / 32},
        scenario={"apexes": (-0.4, 0.0, 0.4)},
    )
