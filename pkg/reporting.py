#!/usr/bin/env python3
"""
Reporting for qteach
Run reports (JSON), learning curves and sampled states (CSV). Complex numbers
are written as [re, im] pairs; every file is written to a temporary sibling
and renamed into place.
"""

import csv
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from trainer import CurvePoint, MultiRestartResult

logger = logging.getLogger(__name__)

ARTIFACT_VERSION = "1.0.0"
CURVE_COLUMNS = ('step', 'exact_fidelity', 'learning_rate')


def complex_pair(z: complex) -> List[float]:
    return [float(np.real(z)), float(np.imag(z))]


def _atomic_target(path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    return path.with_name(path.name + '.tmp')


def write_json(path, data: Dict[str, Any]) -> Path:
    """Write sorted, indented JSON atomically"""
    path = Path(path)
    tmp = _atomic_target(path)
    with open(tmp, 'w', encoding='utf-8') as f:
        json.dump(data, f, indent=2, sort_keys=True, allow_nan=False)
        f.write('\n')
    os.replace(tmp, path)
    logger.debug(f"Wrote {path}")
    return path


def read_json(path) -> Dict[str, Any]:
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)


def _write_rows(path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    tmp = _atomic_target(path)
    with open(tmp, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)
    os.replace(tmp, path)
    logger.debug(f"Wrote {path}")
    return path


def write_curve_csv(path, curve: Sequence[CurvePoint]) -> Path:
    """Learning curve with columns step, exact_fidelity, learning_rate"""
    return _write_rows(path, CURVE_COLUMNS,
                       ((p.step, repr(float(p.exact_fidelity)), repr(float(p.learning_rate))) for p in curve))


def write_samples_csv(path, states: Sequence[np.ndarray]) -> Path:
    """One state per row as re_0, im_0, re_1, im_1, ..."""
    if not len(states):
        raise ValueError("No states to write")
    dim = len(states[0])
    header = [f'{part}_{i}' for i in range(dim) for part in ('re', 'im')]
    rows = ([repr(x) for z in state for x in complex_pair(z)] for state in states)
    return _write_rows(path, header, rows)


def read_samples_csv(path) -> List[np.ndarray]:
    with open(path, 'r', encoding='utf-8', newline='') as f:
        reader = csv.reader(f)
        next(reader)
        return [np.array([float(r) + 1j * float(i) for r, i in zip(row[0::2], row[1::2])]) for row in reader]


def read_weights(path) -> List[float]:
    """Weights from a weights.json ({'weights': [...]}) or a report.json"""
    data = read_json(path)
    if isinstance(data, list):
        return [float(x) for x in data]
    if 'weights' in data:
        return [float(x) for x in data['weights']]
    if 'result' in data and 'weights' in data['result']:
        return [float(x) for x in data['result']['weights']]
    raise ValueError(f"No weights found in {path}")


def build_run_report(experiment, outcome: MultiRestartResult, exact_fidelity: float,
                     validation: Dict[str, float], wall_clock_seconds: float) -> Dict[str, Any]:
    """JSON-ready run report; everything except wall_clock_seconds is deterministic"""
    best = outcome.best
    result = best.to_dict()
    result['exact_fidelity'] = exact_fidelity
    result['error'] = 1.0 - exact_fidelity
    report = {
        'artifact_version': ARTIFACT_VERSION,
        'config': experiment.to_dict(),
        'seed': experiment.train.seed,
        'result': result,
        'converged': best.converged,
        'exact_average_fidelity': exact_fidelity,
        'error': 1.0 - exact_fidelity,
        'validation': {
            'size': experiment.validation_set_size,
            'mean_fidelity': validation['mean'],
            'min_fidelity': validation['min'],
        },
        'restarts': [r.summary() for r in outcome.restarts],
        'wall_clock_seconds': wall_clock_seconds,
    }
    if experiment.planted_weights is not None:
        report['planted_weights'] = list(experiment.planted_weights)
    return report


def build_evaluation_report(experiment, weights: Sequence[float], exact_fidelity: float,
                            validation: Dict[str, float]) -> Dict[str, Any]:
    return {
        'artifact_version': ARTIFACT_VERSION,
        'seed': experiment.train.seed,
        'weights': [float(x) for x in weights],
        'exact_average_fidelity': exact_fidelity,
        'error': 1.0 - exact_fidelity,
        'validation': {
            'size': experiment.validation_set_size,
            'mean_fidelity': validation['mean'],
            'min_fidelity': validation['min'],
        },
    }


def strip_wall_clock(report: Dict[str, Any]) -> Dict[str, Any]:
    return {k: v for k, v in report.items() if k != 'wall_clock_seconds'}


def output_path(experiment, key: str, out_dir: Optional[str] = None) -> Path:
    return Path(out_dir or experiment.output['dir']) / experiment.output[key]
