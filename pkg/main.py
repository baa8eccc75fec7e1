#!/usr/bin/env python3
"""
qteach - Main Entry Point
Teach a quantum gate to an unmodulated qubit network.

Subcommands:
  teach       train the network couplings, write report.json, curve.csv, weights.json
  evaluate    exact and validation-set fidelity of a given weight vector
  grad-check  analytic vs finite-difference gradients on seeded random pairs
  sample      write Haar-random pure states to samples.csv

Exit codes: 0 converged / success, 2 not converged or grad-check failed,
3 config error, 4 internal error.
"""

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

import monitor
from channel_evaluator import exact_average_fidelity, validation_fidelities
from config_loader import ConfigError, DEFAULT_OUTPUT, load_experiment
from network_model import generator_stack
from reporting import (
    build_evaluation_report, build_run_report, output_path, read_weights,
    write_curve_csv, write_json, write_samples_csv,
)
from sampling import GRADCHECK_STREAM, generate_training_pair, haar_random_state, make_rng, validation_set
from trainer import finite_difference_gradient, multi_restart, pair_fidelity_gradient

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NOT_CONVERGED = 2
EXIT_CONFIG_ERROR = 3
EXIT_INTERNAL_ERROR = 4

GRAD_CHECK_TOLERANCE = 1e-6
GRAD_CHECK_STEP = 1e-5
GRAD_CHECK_PAIRS = 5


def setup_logging(log_config: Optional[Dict[str, Any]] = None):
    """Setup logging configuration"""
    log_config = log_config or {}
    log_file = Path(log_config.get('file', 'logs/qteach.log'))

    # Create logs directory
    log_file.parent.mkdir(parents=True, exist_ok=True)

    file_handler = logging.FileHandler(log_file, encoding='utf-8')
    stream_handler = logging.StreamHandler(sys.stderr)
    stream_handler.setFormatter(logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s'))
    logging.basicConfig(
        level=getattr(logging, str(log_config.get('level', 'INFO')).upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[file_handler, stream_handler]
    )


def cmd_teach(config_path: str, seed: Optional[int] = None, out_dir: Optional[str] = None,
              restarts: Optional[int] = None) -> Dict[str, Any]:
    """Train, then write report.json, curve.csv and weights.json; returns the report"""
    experiment = load_experiment(config_path, seed=seed, out_dir=out_dir, restarts=restarts)
    net, target, anc = experiment.network, experiment.target, experiment.ancilla
    print(f"🚀 Teaching {net.num_weights} weights on {net.num_qubits} qubits "
          f"(register {list(net.register)}), seed {experiment.train.seed}")

    progress = on_finish = None
    if experiment.monitor.get('enabled'):
        if monitor.start_monitor(experiment.monitor):
            progress, on_finish = monitor.send_heartbeat, monitor.finish_restart

    started = time.perf_counter()
    try:
        outcome = multi_restart(net, target, anc, experiment.train, progress=progress, on_finish=on_finish)
    finally:
        if progress is not None:
            monitor.stop_monitor()

    best = outcome.best
    exact = exact_average_fidelity(net, best.weights, target, anc)
    validation = validation_fidelities(
        net, best.weights, validation_set(target, experiment.train.seed, experiment.validation_set_size),
        target, anc)
    report = build_run_report(experiment, outcome, exact, validation, time.perf_counter() - started)

    write_json(output_path(experiment, 'report'), report)
    write_curve_csv(output_path(experiment, 'curve'), best.learning_curve)
    write_json(output_path(experiment, 'weights'), {
        'weights': [float(x) for x in best.weights],
        'labels': net.weight_labels(),
    })

    status = "✅ Converged" if best.converged else "⚠️ Not converged"
    print(f"{status}: error {report['error']:.3e} after {best.steps_used} steps "
          f"(restart {best.restart_index} of {len(outcome.restarts)})")
    print(f"📊 Validation fidelity: mean {validation['mean']:.6f}, min {validation['min']:.6f}")
    print(f"💾 Report written to {output_path(experiment, 'report')}")
    return report


def cmd_evaluate(config_path: str, weights_path: str, seed: Optional[int] = None,
                 out_dir: Optional[str] = None) -> Dict[str, Any]:
    """Fidelity report for the weights in a weights.json or report.json"""
    experiment = load_experiment(config_path, seed=seed, out_dir=out_dir)
    net, target, anc = experiment.network, experiment.target, experiment.ancilla
    try:
        weights = read_weights(weights_path)
    except OSError as e:
        raise ConfigError([f"weights: cannot read {weights_path}: {e.strerror or e}"])
    except (ValueError, TypeError) as e:
        raise ConfigError([f"weights: malformed weights file {weights_path}: {e}"])
    if len(weights) != net.num_weights:
        raise ConfigError([f"weights: {len(weights)} values for {net.num_weights} network weights"])

    exact = exact_average_fidelity(net, weights, target, anc)
    validation = validation_fidelities(
        net, weights, validation_set(target, experiment.train.seed, experiment.validation_set_size),
        target, anc)
    report = build_evaluation_report(experiment, weights, exact, validation)

    print(f"🎯 Exact average fidelity: {exact:.12f} (error {report['error']:.3e})")
    print(f"📊 Validation fidelity over {experiment.validation_set_size} pairs: "
          f"mean {validation['mean']:.6f}, min {validation['min']:.6f}")
    return report


def cmd_grad_check(config_path: str, seed: Optional[int] = None, num_pairs: int = GRAD_CHECK_PAIRS,
                   step: float = GRAD_CHECK_STEP, tolerance: float = GRAD_CHECK_TOLERANCE,
                   corrupt_direction: bool = False) -> Dict[str, Any]:
    """
    Compare analytic and central finite-difference gradients at seeded random
    weights and pairs. With corrupt_direction the first generator handed to the
    analytic gradient is doubled, which must be reported as a failure.
    """
    experiment = load_experiment(config_path, seed=seed)
    net, target, anc = experiment.network, experiment.target, experiment.ancilla
    rng = make_rng(experiment.train.seed, GRADCHECK_STREAM)

    generators = None
    if corrupt_direction and net.num_weights:
        generators = np.array(generator_stack(net))
        generators[0] = 2.0 * generators[0]

    labels = net.weight_labels()
    worst = np.zeros(net.num_weights)
    for _ in range(num_pairs):
        w = rng.uniform(-experiment.train.init_scale, experiment.train.init_scale, size=net.num_weights)
        pair = generate_training_pair(target, net.num_register, rng)
        analytic = pair_fidelity_gradient(net, w, pair, target, anc, generators=generators)
        numeric = finite_difference_gradient(net, w, pair, target, anc, step=step)
        worst = np.maximum(worst, np.abs(analytic - numeric))

    rows = [{'label': label, 'max_deviation': float(dev), 'passed': bool(dev <= tolerance)}
            for label, dev in zip(labels, worst)]
    max_deviation = float(worst.max()) if worst.size else 0.0
    passed = all(row['passed'] for row in rows)

    for row in rows:
        mark = "✅" if row['passed'] else "❌"
        print(f"{mark} {row['label']:24s} {row['max_deviation']:.3e}")
    print(f"📊 Max deviation {max_deviation:.3e} over {num_pairs} pairs (tolerance {tolerance:.0e}): "
          f"{'PASS' if passed else 'FAIL'}")
    return {'passed': passed, 'max_deviation': max_deviation, 'tolerance': tolerance, 'rows': rows}


def cmd_sample(num_qubits: int, count: int, seed: int, out_dir: Optional[str] = None) -> Path:
    """Write `count` Haar-random states on `num_qubits` qubits to samples.csv"""
    if count < 1:
        raise ConfigError([f"count: must be >= 1, got {count}"])
    if num_qubits < 1:
        raise ConfigError([f"num_qubits: must be >= 1, got {num_qubits}"])
    rng = make_rng(seed)
    states = [haar_random_state(num_qubits, rng) for _ in range(count)]
    path = write_samples_csv(Path(out_dir or DEFAULT_OUTPUT['dir']) / DEFAULT_OUTPUT['samples'], states)
    print(f"💾 {count} states on {num_qubits} qubits written to {path}")
    return path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='qteach', description='Teach a quantum gate to a qubit network')
    sub = parser.add_subparsers(dest='command', required=True)

    def common(p, weights: bool = False):
        p.add_argument('--config', default='config.yaml', help='experiment config (YAML)')
        if weights:
            p.add_argument('--weights', required=True, help='weights.json or report.json')
        p.add_argument('--seed', type=int, help='override train.seed')
        p.add_argument('--out', help='override output.dir')

    teach = sub.add_parser('teach', help='train the network couplings')
    common(teach)
    teach.add_argument('--restarts', type=int, help='override train.restarts')

    common(sub.add_parser('evaluate', help='fidelity of a weight vector'), weights=True)

    grad = sub.add_parser('grad-check', help='check the analytic gradient')
    common(grad)
    grad.add_argument('--pairs', type=int, default=GRAD_CHECK_PAIRS)
    grad.add_argument('--corrupt-direction', action='store_true', help=argparse.SUPPRESS)

    sample = sub.add_parser('sample', help='write Haar-random states')
    sample.add_argument('--num-qubits', type=int, required=True)
    sample.add_argument('--count', type=int, default=1)
    sample.add_argument('--seed', type=int, default=0)
    sample.add_argument('--out', help='output directory')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code"""
    args = build_parser().parse_args(argv)

    try:
        if args.command == 'sample':
            setup_logging()
            cmd_sample(args.num_qubits, args.count, args.seed, args.out)
            return EXIT_OK

        experiment = load_experiment(args.config, seed=args.seed, out_dir=args.out)
        setup_logging(experiment.logging)

        if args.command == 'teach':
            report = cmd_teach(args.config, seed=args.seed, out_dir=args.out, restarts=args.restarts)
            return EXIT_OK if report['converged'] else EXIT_NOT_CONVERGED
        if args.command == 'evaluate':
            cmd_evaluate(args.config, args.weights, seed=args.seed, out_dir=args.out)
            return EXIT_OK
        result = cmd_grad_check(args.config, seed=args.seed, num_pairs=args.pairs,
                                corrupt_direction=args.corrupt_direction)
        return EXIT_OK if result['passed'] else EXIT_NOT_CONVERGED

    except ConfigError as e:
        print("❌ Configuration error:")
        for error in e.errors:
            print(f"  - {error}")
        return EXIT_CONFIG_ERROR
    except Exception as e:
        logger.exception(f"Internal error: {e}")
        print(f"❌ Internal error: {e}")
        return EXIT_INTERNAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
