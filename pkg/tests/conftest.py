"""Pytest configuration for test suite."""

import pytest

from smock.config import get_settings


def pytest_addoption(parser):
    """Add custom command-line options for pytest."""
    parser.addoption(
        "--run-slow",
        action="store_true",
        default=False,
        help="Run acceptance-scale sweeps (minutes of CPU)"
    )


def pytest_configure(config):
    """Configure pytest with custom markers."""
    config.addinivalue_line(
        "markers",
        "slow: acceptance-scale test (use --run-slow to run)"
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-slow"):
        return
    skip = pytest.mark.skip(reason="needs --run-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(autouse=True)
def fresh_settings():
    """Each test sees default settings, whatever the previous one overrode."""
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()
