"""Pytest configuration and fixtures."""

from __future__ import annotations

import tempfile
from collections.abc import Generator
from pathlib import Path

import pytest
import yaml

from numconj.utils.apery import AperyRow, apery_rows
from numconj.utils.bhargava import TruncationPolicy


@pytest.fixture
def temp_dir() -> Generator[Path]:
    """Create a temporary directory for test files."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def tiny_policy() -> TruncationPolicy:
    """A truncation policy whose cap is too small for any n >= 2."""
    return TruncationPolicy(initial_factor=4, max_members=8, doublings_required=2)


@pytest.fixture(scope="session")
def rows_20() -> list[AperyRow]:
    """Apery rows 0..20."""
    return apery_rows(20)


@pytest.fixture
def sample_config() -> dict:
    """Return a verification configuration with non-default values."""
    return {
        "truncation": {
            "initial_factor": 4,
            "max_members": 4096,
            "doublings_required": 2,
            "sieve_ceiling": 2_000_000,
        },
        "conjectures": {"p0_convention": "skip"},
        "apery": {"float_check_min_dps": 200, "window": 8},
        "reports": {"digit_cap": 50, "decimal_digits": 10},
    }


@pytest.fixture
def sample_config_file(temp_dir: Path, sample_config: dict) -> Path:
    """Create a sample config file."""
    config_path = temp_dir / "verification.yaml"
    with open(config_path, "w") as f:
        yaml.safe_dump(sample_config, f)
    return config_path
