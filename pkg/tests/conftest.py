"""Shared fixtures."""

import os
from pathlib import Path

import pytest

from target_ledger.ledger import AggregateReport, end_of_day_netting, austria_scenario_one
from target_ledger.utils import OUTPUT_DIR_ENV, billions


@pytest.fixture
def austria_report():
    """Aggregates of the Austria example: AT -65bn, IT -100bn, DE +165bn."""
    return AggregateReport.of(['AT', 'IT', 'DE'], [billions(-65), billions(-100), billions(165)])


@pytest.fixture
def austria_matrix():
    participants, payments = austria_scenario_one()
    matrix, _ = end_of_day_netting(payments, 0, participants)
    return matrix


@pytest.fixture
def out_dir(tmp_path, monkeypatch):
    """Output directory with the environment override cleared."""
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)
    path = tmp_path / 'out'
    return path


@pytest.fixture
def fail_replace(monkeypatch):
    """Arm a failure for renaming a staged ``.tmp`` file onto a given name."""
    real_replace = os.replace

    def arm(name):
        def replace(src, dst):
            if Path(dst).name == name and Path(src).name.endswith('.tmp'):
                raise OSError(f"No space left on device: {name}")
            return real_replace(src, dst)

        monkeypatch.setattr(os, 'replace', replace)

    return arm
