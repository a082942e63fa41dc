"""Shared fixtures: scenario file loading and parse helpers."""

from pathlib import Path

import pytest

from dcplan import parse_program
from dcplan.lang.ast import Test

# The control-program AST node is named Test; keep pytest from collecting it.
Test.__test__ = False

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


def scenario_text(name: str) -> str:
    return (SCENARIO_DIR / name).read_text(encoding="utf-8")


def parsed(text: str):
    """Parse source text, failing the test on any diagnostic."""
    res = parse_program(text)
    assert res.ok, [str(d) for d in res.diagnostics]
    return res.program


@pytest.fixture
def scenario():
    return scenario_text


@pytest.fixture
def prog():
    return parsed
