"""
Test Helpers
------------
Small scenarios that keep optimizer runs and exhaustive searches fast.
"""

from src.models import ScenarioConfig


def tiny_config(**blocks) -> ScenarioConfig:
    """1 x 2 array, two slots, 2-bit alphabet; keyword blocks are merged over it"""
    data = {
        'geometry': {'rows': 1, 'cols': 2},
        'modulation': {'slots': 2, 'truncation': 3, 'bits': 2},
        'optimizer': {
            'ceo': {'pop_size': 40, 'max_iters': 8, 'stall_iters': 3},
            'ga': {'pop_size': 20, 'generations': 5},
        },
        'pattern': {'distance_points': 3, 'azimuth_points': 3},
    }
    for name, values in blocks.items():
        if isinstance(values, dict) and isinstance(data.get(name), dict):
            merged = dict(data[name])
            for key, value in values.items():
                if isinstance(value, dict) and isinstance(merged.get(key), dict):
                    merged[key] = {**merged[key], **value}
                else:
                    merged[key] = value
            data[name] = merged
        else:
            data[name] = values
    return ScenarioConfig.model_validate(data)
