"""
Command-Line Harness
--------------------
Entry point for batch experiments:

    python -m src.cli optimize --config configs/beam_pattern.json --out-dir results/run
    python -m src.cli pattern  --config configs/beam_pattern.json --record run_record.json
    python -m src.cli sweep    --config configs/rate_vs_power.json --vary P --values 10,20,30,40

Exit codes: 0 success, 2 configuration error, 3 runtime error.
Grid flags that start with a negative number need the `=` form (`--azimuths=-90,90,181`).
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.models import RunRecord, ScenarioConfig
from src.services.experiments import (
    RecordDesign,
    SweepResult,
    apply_user,
    pattern_comparison,
    run_optimization,
    run_sweep,
)
from src.services.pattern_metrics import GridSpec
from src.utils.config import config, configure_logging
from src.utils.exceptions import ConfigError, FdRisError
from src.utils.records import (
    config_hash,
    load_run_record,
    save_run_record,
    write_csv,
    write_json,
    write_summary,
)
from src.utils.validation import (
    SWEEP_METHODS,
    load_scenario,
    parse_methods,
    parse_users,
    parse_values,
    user_label,
    validate_sweep_axis,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _load(args: argparse.Namespace) -> ScenarioConfig:
    cfg = load_scenario(args.config)
    if args.seed is not None:
        cfg = cfg.model_copy(update={'seed': args.seed})
    return cfg


def _out_dir(args: argparse.Namespace) -> Path:
    return Path(args.out_dir or config.OUTPUT_DIR)


def _axis(raw: Optional[str], default: Sequence[float], name: str) -> np.ndarray:
    """`min,max,points` -> evenly spaced values"""
    if raw is None:
        lo, hi, points = default
    else:
        try:
            lo, hi, points = raw.split(',')
            lo, hi, points = float(lo), float(hi), int(points)
        except ValueError:
            raise ConfigError(f"--{name} expects min,max,points; got '{raw}'", "INVALID_GRID", {name: raw})
    if points < 1 or lo > hi:
        raise ConfigError(f"--{name} needs min <= max and at least one point", "INVALID_GRID", {name: raw})
    return np.linspace(lo, hi, int(points))


def _grid(args: argparse.Namespace, cfg: ScenarioConfig) -> GridSpec:
    block = cfg.pattern
    distances = _axis(args.distances, (block.distance_min, block.distance_max, block.distance_points), 'distances')
    azimuths = _axis(args.azimuths, (block.azimuth_min_deg, block.azimuth_max_deg, block.azimuth_points), 'azimuths')
    return GridSpec(distances, np.deg2rad(azimuths), float(np.deg2rad(cfg.geometry.user.elevation_deg)))


def _record_summary(record: RunRecord) -> str:
    return (
        f"method={record.method} seed={record.seed} rate={record.best_rate:.6f} bit/s/Hz "
        f"f0={record.best_mod_freq_hz:.1f} Hz iterations={record.iterations} "
        f"evaluations={record.evaluations} config_sha256={record.config_hash}"
    )


def _threads(args: argparse.Namespace) -> int:
    return args.threads or config.WORKER_THREADS


def cmd_optimize(args: argparse.Namespace) -> RunRecord:
    cfg = _load(args)
    record = run_optimization(cfg, _threads(args))
    out = _out_dir(args)
    save_run_record(out / 'run_record.json', record)
    write_summary(out / 'summary.txt', [_record_summary(record)])
    logger.info(f"Optimization wall time: {record.wall_time_s:.3f} s")
    print(_record_summary(record))
    return record


def _write_pattern(path: Path, pattern, record: RunRecord) -> None:
    write_csv(path.with_suffix('.csv'), ('distance', 'azimuth', 'power'), pattern.csv_rows(), record.seed, record.config_hash)
    write_json(path.with_suffix('.json'), {
        'seed': record.seed,
        'config_sha256': record.config_hash,
        'method': record.method,
        'pattern': pattern.to_dict(),
    })


def cmd_pattern(args: argparse.Namespace) -> dict:
    cfg = _load(args)
    threads = _threads(args)
    if args.record:
        record = load_run_record(args.record)
    else:
        logger.info("No run record given; optimizing the scenario first")
        record = run_optimization(cfg, threads)
    include_path_loss = cfg.pattern.include_path_loss and not args.no_path_loss
    grid = _grid(args, cfg)
    out = _out_dir(args)

    pattern = RecordDesign.from_record(record).pattern(grid, include_path_loss, threads)
    _write_pattern(out / 'pattern', pattern, record)
    result = {'peak': pattern.peak()}

    if args.reference:
        reference = load_run_record(args.reference)
        reference_pattern = RecordDesign.from_record(reference).pattern(grid, include_path_loss, threads)
        _write_pattern(out / 'pattern_reference', reference_pattern, reference)
        comparison = pattern_comparison(record, reference, grid, include_path_loss, threads)
        comparison.update({
            'seed': record.seed,
            'config_sha256': record.config_hash,
            'reference_seed': reference.seed,
            'reference_config_sha256': reference.config_hash,
        })
        write_json(out / 'pattern_ratio.json', comparison)
        result['comparison'] = comparison
        print(
            f"target power ratio={comparison['peak_power_ratio']:.4f} "
            f"grid peak ratio={comparison['grid_peak_ratio']:.4f}"
        )
    else:
        peak = result['peak']
        print(f"peak power={peak['power']:.6e} W at {peak['distance']:.1f} m, {peak['azimuth_deg']:.1f} deg")
    return result


def _write_sweep(out: Path, cfg: ScenarioConfig, result: SweepResult, trials: int) -> List[str]:
    digest = config_hash(cfg)
    write_csv(
        out / 'sweep.csv',
        ('axis_value', 'method', 'mean_rate', 'std_rate', 'trials'),
        [[r['axis_value'], r['method'], r['mean_rate'], r['std_rate'], r['trials']] for r in result.rows],
        cfg.seed,
        digest,
    )
    write_csv(
        out / 'sweep_gains.csv',
        ('axis_value', 'method', 'reference', 'rate_gap', 'gain_db', 'element_savings'),
        [
            [g['axis_value'], g['method'], g['reference'], g['rate_gap'], g['gain_db'], g['element_savings']]
            for g in result.gains
        ],
        cfg.seed,
        digest,
    )
    lines = [f"sweep axis={result.axis} trials={trials} seed={cfg.seed} config_sha256={digest}"]
    lines += [
        f"{r['axis_value']} {r['method']}: {r['mean_rate']:.6f} +/- {r['std_rate']:.6f} bit/s/Hz"
        for r in result.rows
    ]
    write_summary(out / 'summary.txt', lines)
    return lines


def cmd_sweep(args: argparse.Namespace) -> Dict[str, SweepResult]:
    """One sweep per user location; with --users each lands in its own subdirectory"""
    cfg = _load(args)
    axis = validate_sweep_axis(args.vary)
    values = parse_values(args.values, axis)
    methods = parse_methods(args.methods)
    threads = _threads(args)
    out = _out_dir(args)
    targets = [(None, cfg)]
    if args.users:
        targets = [(user_label(u), apply_user(cfg, u)) for u in parse_users(args.users)]

    results = {}
    for label, target_cfg in targets:
        result = run_sweep(target_cfg, axis, values, methods, args.trials, threads)
        lines = _write_sweep(out / label if label else out, target_cfg, result, args.trials)
        if label:
            print(label)
        print('\n'.join(lines))
        results[label or 'default'] = result
    return results


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='fdris',
        description='Frequency-diverse reconfigurable surface simulator and optimizers',
    )
    parser.add_argument('--log-level', default=None, help='Override LOG_LEVEL')
    sub = parser.add_subparsers(dest='command', required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument('--config', type=Path, required=True, help='Scenario file (JSON)')
        p.add_argument('--out-dir', default=None, help='Output directory (default: OUTPUT_DIR)')
        p.add_argument('--seed', type=int, default=None, help='Override the scenario seed')
        p.add_argument('--threads', type=int, default=None, help='Worker threads (default: WORKER_THREADS)')

    p_opt = sub.add_parser('optimize', help='Optimize one scenario and write its run record')
    common(p_opt)
    p_opt.set_defaults(handler=cmd_optimize)

    p_pat = sub.add_parser('pattern', help='Received-power pattern of an optimized surface')
    common(p_pat)
    p_pat.add_argument('--record', type=Path, default=None, help='Run record supplying the optimized codes')
    p_pat.add_argument('--reference', type=Path, default=None, help='Second run record to compare against')
    p_pat.add_argument('--distances', default=None, help='min,max,points in meters')
    p_pat.add_argument('--azimuths', default=None, help='min,max,points in degrees')
    p_pat.add_argument('--no-path-loss', action='store_true', help='Drop the large-scale path loss')
    p_pat.set_defaults(handler=cmd_pattern)

    p_swp = sub.add_parser('sweep', help='Seeded parameter sweep over S, P or bits')
    common(p_swp)
    p_swp.add_argument('--vary', required=True, help='S | P | bits')
    p_swp.add_argument('--values', required=True, help='Comma-separated axis values')
    p_swp.add_argument('--methods', default='fdris-ceo,ris-ceo', help=f"Any of {', '.join(SWEEP_METHODS)}")
    p_swp.add_argument('--trials', type=int, default=5, help='Seeded trials per cell')
    p_swp.add_argument('--users', default=None, help='User locations "distance,elevation,azimuth;..." (m, deg, deg)')
    p_swp.set_defaults(handler=cmd_sweep)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        args.handler(args)
    except ConfigError as e:
        logger.error(f"Configuration error: {e.to_dict()}")
        print(e.message, file=sys.stderr)
        return EXIT_CONFIG
    except FdRisError as e:
        logger.error(f"Run failed: {e.to_dict()}")
        print(e.message, file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as e:
        logger.exception(f"Unexpected error: {e}")
        print(f"Unexpected error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
