"""
Shared Test Fixtures
--------------------
"""

import json
from pathlib import Path

import pytest

from src.models import ScenarioConfig
from tests.helpers import tiny_config


@pytest.fixture
def tiny_cfg() -> ScenarioConfig:
    return tiny_config()


@pytest.fixture
def write_config(tmp_path: Path):
    """Write a scenario (model or dict) to a JSON file and return its path"""
    def _write(cfg, name: str = 'scenario.json') -> Path:
        path = tmp_path / name
        payload = cfg.model_dump(mode='json') if isinstance(cfg, ScenarioConfig) else cfg
        path.write_text(json.dumps(payload, indent=2), encoding='utf-8')
        return path
    return _write
