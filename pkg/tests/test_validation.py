"""
Scenario Validation Tests
-------------------------
Decoding and schema diagnostics for scenario files and sweep arguments.
"""

from pathlib import Path

import pytest

from src.models import ScenarioConfig
from src.utils.exceptions import ConfigError
from src.utils.validation import (
    load_scenario,
    parse_methods,
    parse_scenario,
    parse_users,
    parse_values,
    user_label,
    validate_sweep_axis,
)

CONFIGS = Path(__file__).resolve().parent.parent / 'configs'


def test_defaults_are_reference_values():
    cfg = parse_scenario('{}')
    assert cfg.modulation.truncation == 3
    assert cfg.modulation.slots == 7
    assert cfg.modulation.bits == 2
    assert cfg.geometry.carrier_hz == 28e9
    assert (cfg.modulation.freq_min_hz, cfg.modulation.freq_max_hz) == (1e5, 2.8e5)
    assert cfg.power.noise_dbm == -110.0
    assert cfg.optimizer.ceo.smoothing == 0.65
    assert cfg.geometry.bs.distance == 30.0


def test_decode_error_reports_position():
    with pytest.raises(ConfigError) as err:
        parse_scenario('{\n  "seed": 1,\n}', 'bad.json')
    assert err.value.error_code == "CONFIG_PARSE_ERROR"
    assert err.value.message.startswith('bad.json:3:')
    assert err.value.details['line'] == 3


def test_field_error_reports_path_and_line():
    text = '{\n  "geometry": {\n    "rows": 0\n  }\n}'
    with pytest.raises(ConfigError) as err:
        parse_scenario(text)
    assert err.value.error_code == "CONFIG_VALIDATION_ERROR"
    (problem,) = err.value.details['errors']
    assert problem['field'] == 'geometry.rows'
    assert problem['line'] == 3
    assert '<config>:3: geometry.rows' in err.value.message


def test_frequency_bounds_error_names_the_field():
    with pytest.raises(ConfigError) as err:
        parse_scenario('{"modulation": {"freq_min_hz": 3e5, "freq_max_hz": 1e5}}')
    assert 'freq_min_hz' in err.value.message
    assert err.value.details['errors'][0]['field'] == 'modulation'


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError) as err:
        parse_scenario('{"geometry": {"colour": "blue"}}')
    assert err.value.details['errors'][0]['field'] == 'geometry.colour'
    with pytest.raises(ConfigError):
        parse_scenario('[1, 2]')


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError) as err:
        load_scenario(tmp_path / 'absent.json')
    assert err.value.error_code == "CONFIG_NOT_FOUND"


@pytest.mark.parametrize("name", ['beam_pattern.json', 'rate_vs_elements.json', 'rate_vs_power.json', 'one_bit.json'])
def test_reference_configs_round_trip(name):
    cfg = load_scenario(CONFIGS / name)
    assert isinstance(cfg, ScenarioConfig)
    assert parse_scenario(cfg.model_dump_json()) == cfg


def test_sweep_arguments():
    assert validate_sweep_axis('bits') == 'bits'
    with pytest.raises(ConfigError) as err:
        validate_sweep_axis('Q')
    assert err.value.error_code == "UNKNOWN_AXIS"
    assert parse_values('10, 20,30', 'P') == [10.0, 20.0, 30.0]
    assert parse_values('36,64', 'S') == [36, 64]
    for raw, axis in [('1.5', 'bits'), ('0', 'S'), ('', 'P'), ('ten', 'P')]:
        with pytest.raises(ConfigError):
            parse_values(raw, axis)
    assert parse_methods('fdris-ceo, ris-oracle') == ['fdris-ceo', 'ris-oracle']
    with pytest.raises(ConfigError) as err:
        parse_methods('fdris-ceo,annealing')
    assert err.value.error_code == "UNKNOWN_METHOD"


def test_user_locations():
    users = parse_users('150,90,30; 200,80,-45;')
    assert [(u.distance, u.elevation_deg, u.azimuth_deg) for u in users] == [(150.0, 90.0, 30.0), (200.0, 80.0, -45.0)]
    assert user_label(users[1]) == 'user_200m_80el_-45az'
    for raw in ('', '150,90', '0,90,30', 'a,b,c'):
        with pytest.raises(ConfigError) as err:
            parse_users(raw)
        assert err.value.error_code == "INVALID_USERS"
