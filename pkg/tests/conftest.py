"""
Shared fixtures.

Every test starts from default configuration (no config.json, no environment
overrides) and a private reference-cache directory.
"""

import logging
from pathlib import Path
from typing import Iterator

import numpy as np
import pytest

from sam_dde.config import Config, set_config
from sam_dde.problems.toggle import ToggleParams

ENV_VARS = (
    "SAM_DDE_REL_TOL",
    "SAM_DDE_ABS_TOL",
    "SAM_DDE_MAX_STEPS",
    "SAM_DDE_FEASIBILITY_RATIO",
    "SAM_DDE_FEASIBILITY_SLACK",
    "SAM_DDE_CACHE_SIZE",
    "SAM_DDE_PERSIST_REFERENCES",
    "SAM_DDE_CACHE_DIR",
    "SAM_DDE_MAX_WORKERS",
    "SAM_DDE_SEED",
    "SAM_DDE_CONFIG_FILE",
    "LOG_LEVEL",
    "DEBUG",
)


@pytest.fixture(autouse=True)
def default_config(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> Iterator[Config]:
    """Reset the global configuration and isolate environment and cache directory."""
    for var in ENV_VARS:
        monkeypatch.delenv(var, raising=False)
    monkeypatch.setenv("SAM_DDE_CACHE_DIR", str(tmp_path / "cache"))
    config = Config()
    set_config(config)
    yield config
    root = logging.getLogger("sam_dde")
    for handler in [h for h in root.handlers if getattr(h, "_sam_dde", False)]:
        root.removeHandler(handler)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def toggle_params() -> ToggleParams:
    return ToggleParams()
