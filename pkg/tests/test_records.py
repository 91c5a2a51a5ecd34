"""
Result Persistence Tests
------------------------
"""

import json

import pytest

from src.services.experiments import run_optimization
from src.utils.exceptions import RecordError
from src.utils.records import (
    config_hash,
    load_run_record,
    read_csv,
    save_run_record,
    write_csv,
)
from tests.helpers import tiny_config


def test_config_hash_is_stable_and_sensitive():
    cfg = tiny_config()
    assert config_hash(cfg) == config_hash(tiny_config())
    assert len(config_hash(cfg)) == 64
    assert config_hash(cfg) != config_hash(cfg.model_copy(update={'seed': 1}))


def test_csv_carries_seed_and_hash(tmp_path):
    path = write_csv(tmp_path / 'out' / 'table.csv', ('a', 'b'), [[1, 0.1], ['x', 2.5]], 7, 'abc')
    lines = path.read_text(encoding='utf-8').splitlines()
    assert lines[0] == '# seed=7 config_sha256=abc'
    assert lines[1] == 'a,b'
    assert read_csv(path) == [['a', 'b'], ['1', '0.1'], ['x', '2.5']]


def test_run_record_round_trip(tmp_path):
    record = run_optimization(tiny_config())
    assert record.wall_time_s is not None
    path = save_run_record(tmp_path / 'run_record.json', record)
    payload = json.loads(path.read_text(encoding='utf-8'))
    assert 'wall_time_s' not in payload
    assert payload['config_hash'] == config_hash(record.config)
    loaded = load_run_record(path)
    assert loaded.model_dump() == record.model_dump()
    assert loaded.wall_time_s is None


def test_missing_and_invalid_records(tmp_path):
    with pytest.raises(RecordError) as err:
        load_run_record(tmp_path / 'none.json')
    assert err.value.error_code == "MISSING_RECORD"
    bad = tmp_path / 'bad.json'
    bad.write_text('{"method": "ceo"}', encoding='utf-8')
    with pytest.raises(RecordError) as err:
        load_run_record(bad)
    assert err.value.error_code == "INVALID_RECORD"
