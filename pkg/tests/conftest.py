# tests/conftest.py

import os

import pytest


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance: long-running figure-trend checks, enabled with OCEAN_ACCEPTANCE=1"
    )


def pytest_collection_modifyitems(config, items):
    if os.environ.get("OCEAN_ACCEPTANCE") == "1":
        return
    skip = pytest.mark.skip(reason="set OCEAN_ACCEPTANCE=1 to run acceptance checks")
    for item in items:
        if "acceptance" in item.keywords:
            item.add_marker(skip)
