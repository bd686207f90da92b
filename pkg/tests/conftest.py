import logging
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

CERTIFY_LOGGER = "reducible_anosov.certify"


class ConfigCollector(logging.Handler):
    """Keeps every configuration attached to a plausible verdict during the session."""

    def __init__(self):
        super().__init__(level=logging.INFO)
        self.records: list[logging.LogRecord] = []

    def emit(self, record):
        if record.getMessage() == "plausible configuration":
            self.records.append(record)


COLLECTOR = ConfigCollector()
CRITERIA: dict[int, tuple[bool, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "run_last: run after every other test in the session")
    logger = logging.getLogger(CERTIFY_LOGGER)
    logger.addHandler(COLLECTOR)
    logger.setLevel(logging.INFO)


def pytest_collection_modifyitems(session, config, items):
    last = [it for it in items if it.get_closest_marker("run_last")]
    rest = [it for it in items if not it.get_closest_marker("run_last")]
    items[:] = rest + last


@pytest.fixture
def record_criterion():
    def record(n: int, ok: bool, detail: str) -> None:
        CRITERIA[n] = (ok, detail)
        print(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")

    return record


@pytest.fixture
def config_collector():
    return COLLECTOR


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        ok, detail = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")
