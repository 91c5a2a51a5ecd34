"""
Result Persistence
------------------
Deterministic writers for run records, CSV tables and plain-text summaries.
Every file carries the seed and the SHA-256 hash of the resolved scenario.
"""

import csv
import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Iterable, Sequence

from pydantic import ValidationError

from src.models import RunRecord, ScenarioConfig
from src.utils.exceptions import RecordError

logger = logging.getLogger(__name__)


def canonical_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, separators=(',', ':'))


def config_hash(cfg: ScenarioConfig) -> str:
    return hashlib.sha256(canonical_json(cfg.model_dump(mode='json')).encode('utf-8')).hexdigest()


def write_json(path: Path, payload: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + '\n', encoding='utf-8')
    logger.info(f"Wrote {path}")
    return path


def write_csv(
    path: Path,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    seed: int,
    digest: str,
) -> Path:
    """CSV with a leading `# seed=... config_sha256=...` comment line, then the header"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8', newline='') as handle:
        handle.write(f"# seed={seed} config_sha256={digest}\n")
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    logger.info(f"Wrote {path}")
    return path


def read_csv(path: Path) -> list:
    """Rows of a file written by `write_csv`, header included, comment lines skipped"""
    with Path(path).open(encoding='utf-8', newline='') as handle:
        return list(csv.reader(line for line in handle if not line.startswith('#')))


def write_summary(path: Path, lines: Sequence[str]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text('\n'.join(lines) + '\n', encoding='utf-8')
    return path


def save_run_record(path: Path, record: RunRecord) -> Path:
    return write_json(path, record.model_dump(mode='json'))


def load_run_record(path: Path) -> RunRecord:
    path = Path(path)
    if not path.is_file():
        raise RecordError(f"Run record not found: {path}", "MISSING_RECORD", {'path': str(path)})
    try:
        return RunRecord.model_validate_json(path.read_text(encoding='utf-8'))
    except ValidationError as e:
        raise RecordError(
            f"Run record is invalid: {path}",
            "INVALID_RECORD",
            {'path': str(path), 'errors': [err['msg'] for err in e.errors()]},
        )
