from __future__ import annotations

import pytest

from fracinv.batteries import BATTERIES, run_battery
from fracinv.config import parse_config


@pytest.mark.parametrize("name", sorted(BATTERIES))
def test_batteries_pass(name):
    result = run_battery(name)
    failed = [c for c in result.checks if not c.passed]
    assert not failed, failed
    assert result.checks


def test_positivity_precondition_reported():
    cfg = parse_config({"initial": {"preset": "mode", "k": 2}})
    result = run_battery("positivity", cfg)
    assert not result.passed
    assert "precondition" in result.checks[0].note


def test_unknown_battery():
    with pytest.raises(ValueError):
        run_battery("nope")
