import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from rotorgym.config import builtin, load_robot_config

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("repo", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile("repo")

_CRITERIA: list[str] = []


def record_criterion(number: int, title: str, ok: bool, detail: str = "") -> None:
    """Print one pass/fail line and keep it for the end-of-run summary."""
    line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}" + (f"  ({detail})" if detail else "")
    print(line)
    _CRITERIA.append(line)


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERIA, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def quad():
    return load_robot_config(builtin("quad.yaml"))


@pytest.fixture(scope="session")
def octa():
    return load_robot_config(builtin("octa_tilted.yaml"))


@pytest.fixture
def criterion():
    return record_criterion
