"""
Scenario Validation
-------------------
Loads scenario files (JSON text) into `ScenarioConfig` and turns decode and
schema failures into `ConfigError`s that point at the offending line.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from pydantic import ValidationError

from src.models import PlacementBlock, ScenarioConfig
from src.utils.exceptions import ConfigError

SWEEP_AXES = ('S', 'P', 'bits')
SWEEP_METHODS = ('fdris-ceo', 'fdris-ga', 'ris-ceo', 'ris-ga', 'ris-oracle')


def _locate(text: str, loc: Sequence[Any]) -> Optional[int]:
    """Line of the last key in `loc`, found by walking the keys in order through the text"""
    pos = 0
    line = None
    for key in loc:
        if not isinstance(key, str):
            continue
        hit = text.find(f'"{key}"', pos)
        if hit < 0:
            break
        pos = hit
        line = text.count('\n', 0, hit) + 1
    return line


def _describe(errors: List[Dict[str, Any]], text: str) -> List[Dict[str, Any]]:
    described = []
    for err in errors:
        field = '.'.join(str(part) for part in err['loc']) or '<root>'
        described.append({
            'field': field,
            'line': _locate(text, err['loc']),
            'message': err['msg'],
        })
    return described


def parse_scenario(text: str, source: str = '<config>') -> ScenarioConfig:
    """Parse JSON scenario text; raise ConfigError with line-level diagnostics"""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(
            f"{source}:{e.lineno}:{e.colno}: {e.msg}",
            "CONFIG_PARSE_ERROR",
            {'line': e.lineno, 'column': e.colno},
        )
    return validate_scenario(data, text, source)


def validate_scenario(data: Any, text: str = '', source: str = '<config>') -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: scenario must be a JSON object", "CONFIG_VALIDATION_ERROR")
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        errors = _describe(e.errors(), text)
        lines = [
            f"{source}:{err['line'] or '?'}: {err['field']}: {err['message']}"
            for err in errors
        ]
        raise ConfigError('\n'.join(lines), "CONFIG_VALIDATION_ERROR", {'errors': errors})


def load_scenario(path: Path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ConfigError(f"Cannot read scenario file {path}: {e}", "CONFIG_NOT_FOUND", {'path': str(path)})
    return parse_scenario(text, str(path))


def validate_sweep_axis(axis: str) -> str:
    if axis not in SWEEP_AXES:
        raise ConfigError(
            f"Unknown sweep axis '{axis}'",
            "UNKNOWN_AXIS",
            {'axis': axis, 'allowed': list(SWEEP_AXES)},
        )
    return axis


def parse_values(raw: str, axis: str) -> List[float]:
    """Comma-separated sweep values; S and bits must be positive integers"""
    try:
        values = [float(v) for v in raw.split(',') if v.strip()]
    except ValueError:
        raise ConfigError(f"Invalid sweep values '{raw}'", "INVALID_SWEEP_VALUES", {'values': raw})
    if not values:
        raise ConfigError("Sweep needs at least one value", "INVALID_SWEEP_VALUES", {'values': raw})
    if axis in ('S', 'bits'):
        if any(v != int(v) or v < 1 for v in values):
            raise ConfigError(
                f"Sweep values for {axis} must be positive integers",
                "INVALID_SWEEP_VALUES",
                {'values': raw},
            )
        return [int(v) for v in values]
    return values


def parse_methods(raw: str) -> List[str]:
    methods = [m.strip() for m in raw.split(',') if m.strip()]
    unknown = [m for m in methods if m not in SWEEP_METHODS]
    if unknown or not methods:
        raise ConfigError(
            f"Unknown sweep methods: {', '.join(unknown) or '<none>'}",
            "UNKNOWN_METHOD",
            {'allowed': list(SWEEP_METHODS)},
        )
    return methods


def parse_users(raw: str) -> List[PlacementBlock]:
    """`distance,elevation,azimuth` user locations (m, deg, deg) separated by `;`"""
    users = []
    for item in (part.strip() for part in raw.split(';')):
        if not item:
            continue
        try:
            distance, elevation, azimuth = (float(v) for v in item.split(','))
            users.append(PlacementBlock(distance=distance, elevation_deg=elevation, azimuth_deg=azimuth))
        except (ValueError, ValidationError):
            raise ConfigError(
                f"User locations expect distance,elevation,azimuth; got '{item}'",
                "INVALID_USERS",
                {'users': raw},
            )
    if not users:
        raise ConfigError("Sweep needs at least one user location", "INVALID_USERS", {'users': raw})
    return users


def user_label(user: PlacementBlock) -> str:
    return f"user_{user.distance:g}m_{user.elevation_deg:g}el_{user.azimuth_deg:g}az"
