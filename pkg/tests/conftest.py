from __future__ import annotations

import pytest

import config_loader
from geometry import StripConfig


@pytest.fixture(autouse=True)
def fresh_config(monkeypatch):
    monkeypatch.delenv("WELD_LOG_LEVEL", raising=False)
    monkeypatch.delenv("WELD_WORKERS", raising=False)
    config_loader.reset()
    yield
    config_loader.reset()


@pytest.fixture
def strip() -> StripConfig:
    return StripConfig(alpha=1.0, tau=3.0)
