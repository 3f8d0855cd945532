"""Pytest fixtures for the secondary suite; paths live in parity_paths.py."""

import pytest

from parity_paths import FIXTURES


@pytest.fixture
def fixtures_dir() -> str:
    return FIXTURES
