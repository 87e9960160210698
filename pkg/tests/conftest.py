"""Shared fixtures and the acceptance-summary reporter."""

import json
from pathlib import Path

import pytest

from scenespeak.scene import load_bundled_scene

DATA = Path(__file__).parent / "data"


@pytest.fixture
def sandbox():
    return load_bundled_scene("sandbox")


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def script_file(tmp_path):
    """Write a provider script usable as SessionConfig.mock_script."""

    def make(entries, name="script.json"):
        path = tmp_path / name
        path.write_text(json.dumps(entries), encoding="utf-8")
        return str(path)

    return make


def golden_text(name: str) -> str:
    return (DATA / name).read_text(encoding="utf-8")


def golden_json(name: str):
    return json.loads(golden_text(name))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One verdict line per acceptance criterion."""
    rows = []
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            if getattr(rep, "when", "call") != "call":
                continue
            if "test_acceptance.py" in rep.nodeid:
                name = rep.nodeid.split("::")[-1]
                rows.append((name, "PASS" if rep.passed else "FAIL"))
    if rows:
        terminalreporter.write_sep("=", "acceptance criteria")
        for name, verdict in sorted(rows):
            terminalreporter.write_line(f"{verdict}  {name}")
