import os
from pathlib import Path

import numpy as np
import pytest

from copbreak import Quarter, growth_rates, read_csv

ROOT = Path(__file__).resolve().parents[1]
VINTAGE_CSV = ROOT / "data" / "us_gdp_1947q1_2012q2.csv"
DEMO_CSV = ROOT / "data" / "us_realgdp_1959q1_2009q3.csv"

_acceptance = []


def vintage_path():
    env = os.environ.get("COPBREAK_GDP_CSV")
    if env:
        return Path(env)
    return VINTAGE_CSV


@pytest.fixture(scope="session")
def vintage_gdp():
    """Level series matching the 2012 vintage span, or skip."""
    path = vintage_path()
    if not path.exists():
        pytest.skip(f"2012-vintage GDP levels not available ({path}); see data/README.md")
    levels = read_csv(str(path))
    if levels.start != Quarter(1947, 1) or levels.end != Quarter(2012, 2):
        pytest.skip(f"{path} spans {levels.start}..{levels.end}, not 1947Q1..2012Q2")
    return levels


@pytest.fixture(scope="session")
def vintage_growth(vintage_gdp):
    return growth_rates(vintage_gdp)


@pytest.fixture(scope="session")
def demo_csv():
    return str(DEMO_CSV)


@pytest.fixture
def rng():
    return np.random.default_rng(20120901)


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome, report))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, report in _acceptance:
        tag = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[outcome]
        reason = ""
        if outcome == "skipped" and isinstance(report.longrepr, tuple):
            reason = "  (" + report.longrepr[2].removeprefix("Skipped: ") + ")"
        terminalreporter.write_line(f"{tag}  {name}{reason}")
