#!/usr/bin/env python3
"""
Configuration Loader for qteach
Handles loading, validation and saving of experiment configuration files
"""

import copy
import logging
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import yaml
from dotenv import load_dotenv

from channel_evaluator import AncillaPrep, planted_target
from gate_library import NamedGate, build_gate
from network_model import (
    CouplingModel, QubitNetwork, all_field_sites, chain_edges, complete_edges,
    ring_edges, validate_network, COUPLING_KINDS,
)
from sampling import DEFAULT_VALIDATION_SIZE
from tensor_algebra import check_unitary
from trainer import TrainConfig, weight_bounds

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

TOPOLOGIES = {'chain': chain_edges, 'ring': ring_edges, 'complete': complete_edges}
TRAIN_INT_FIELDS = ('inner_steps', 'max_outer_steps', 'restarts', 'seed', 'checkpoint_every', 'workers')
TRAIN_FLOAT_FIELDS = ('kappa0', 'decay_exponent', 'target_error', 'init_scale')

DEFAULT_OUTPUT = {
    'dir': 'runs/default',
    'report': 'report.json',
    'curve': 'curve.csv',
    'weights': 'weights.json',
    'samples': 'samples.csv',
}
DEFAULT_LOGGING = {
    'level': 'INFO',
    'file': 'logs/qteach.log',
}
DEFAULT_MONITOR = {
    'enabled': True,
    'heartbeat_interval': 10,
    'max_failures': 3,
    'heartbeat_file': 'logs/heartbeat.json',
}


class ConfigError(ValueError):
    """Malformed experiment configuration; carries one message per problem"""

    def __init__(self, errors: List[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(eq=False)
class ExperimentConfig:
    network: QubitNetwork
    target: np.ndarray
    target_spec: Dict[str, Any]
    ancilla_state: str
    train: TrainConfig
    validation_set_size: int = DEFAULT_VALIDATION_SIZE
    output: Dict[str, Any] = field(default_factory=lambda: dict(DEFAULT_OUTPUT))
    logging: Dict[str, Any] = field(default_factory=lambda: dict(DEFAULT_LOGGING))
    monitor: Dict[str, Any] = field(default_factory=lambda: dict(DEFAULT_MONITOR))
    planted_weights: Optional[List[float]] = None

    @property
    def ancilla(self) -> AncillaPrep:
        return AncillaPrep.from_label(self.ancilla_state, self.network.num_ancillas)

    def to_dict(self) -> Dict[str, Any]:
        """Normalized config; parse_experiment(to_dict()) reproduces this object"""
        net = self.network
        return {
            'schema_version': SCHEMA_VERSION,
            'network': {
                'num_qubits': net.num_qubits,
                'register': list(net.register),
                'coupling': net.model.kind,
                'pauli_pairs': [list(p) for p in net.model.pauli_pairs],
                'field_axes': list(net.model.local_field_axes),
                'edges': [list(e) for e in net.edges],
                'fields': [[q, a] for q, a in net.field_sites],
            },
            'target': copy.deepcopy(self.target_spec),
            'ancilla_state': self.ancilla_state,
            'train': copy.deepcopy(self.train.to_dict()),
            'validation_set_size': self.validation_set_size,
            'output': dict(self.output),
            'logging': dict(self.logging),
            'monitor': dict(self.monitor),
        }


def load_yaml_config(file_path: str = "config.yaml") -> Dict[str, Any]:
    """Load configuration from YAML file"""
    try:
        with open(file_path, 'r', encoding='utf-8') as f:
            config = yaml.safe_load(f)
    except FileNotFoundError:
        logger.error(f"Config file not found: {file_path}")
        raise ConfigError([f"config: file not found: {file_path}"])
    except yaml.YAMLError as e:
        logger.error(f"Error parsing config file: {e}")
        raise ConfigError([f"config: YAML parse error: {e}"])
    if config is None:
        return {}
    if not isinstance(config, dict):
        raise ConfigError(["config: top level must be a mapping"])
    return config


def load_env_config() -> Dict[str, Any]:
    """Load overrides from environment variables (and a .env file)"""
    load_dotenv()
    config: Dict[str, Any] = {}

    if os.getenv('LOG_LEVEL'):
        config.setdefault('logging', {})['level'] = os.getenv('LOG_LEVEL')
    if os.getenv('LOG_FILE'):
        config.setdefault('logging', {})['file'] = os.getenv('LOG_FILE')
    if os.getenv('QTEACH_SEED'):
        config.setdefault('train', {})['seed'] = os.getenv('QTEACH_SEED')
    if os.getenv('QTEACH_RESTARTS'):
        config.setdefault('train', {})['restarts'] = os.getenv('QTEACH_RESTARTS')
    if os.getenv('QTEACH_OUT_DIR'):
        config.setdefault('output', {})['dir'] = os.getenv('QTEACH_OUT_DIR')

    return config


def get_config(file_path: str = "config.yaml") -> Dict[str, Any]:
    """Get merged configuration from YAML and environment"""
    config = load_yaml_config(file_path)

    # Environment overrides YAML
    for section, values in load_env_config().items():
        if not isinstance(config.get(section), dict):
            config[section] = {}
        config[section].update(values)

    # Defaults for missing sections
    config.setdefault('schema_version', SCHEMA_VERSION)
    config.setdefault('ancilla_state', None)
    config.setdefault('train', {})
    config.setdefault('validation_set_size', DEFAULT_VALIDATION_SIZE)
    for section, defaults in (('output', DEFAULT_OUTPUT), ('logging', DEFAULT_LOGGING),
                              ('monitor', DEFAULT_MONITOR)):
        if config.get(section) is None:
            config[section] = {}
        if isinstance(config[section], dict):
            for key, value in defaults.items():
                config[section].setdefault(key, value)

    return config


def _to_int(value: Any, path: str, errors: List[str]) -> Optional[int]:
    try:
        if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
            raise ValueError
        return int(value)
    except (TypeError, ValueError):
        errors.append(f"{path}: expected an integer, got {value!r}")
        return None


def _to_float(value: Any, path: str, errors: List[str]) -> Optional[float]:
    try:
        if isinstance(value, bool):
            raise ValueError
        return float(value)
    except (TypeError, ValueError):
        errors.append(f"{path}: expected a number, got {value!r}")
        return None


def _parse_network(section: Any, errors: List[str]) -> Optional[QubitNetwork]:
    if not isinstance(section, dict):
        errors.append("network: section is required and must be a mapping")
        return None

    num_qubits = _to_int(section.get('num_qubits'), 'network.num_qubits', errors)
    register = section.get('register')
    if not isinstance(register, list) or not register:
        errors.append("network.register: expected a nonempty list of qubit indices")
        return None
    register = [_to_int(q, f'network.register[{i}]', errors) for i, q in enumerate(register)]

    kind = str(section.get('coupling', 'heisenberg')).lower()
    if kind not in COUPLING_KINDS:
        errors.append(f"network.coupling: unknown model '{kind}' (expected one of {', '.join(COUPLING_KINDS)})")
    pairs = section.get('pauli_pairs') or []
    if not isinstance(pairs, list) or any(not isinstance(p, (list, tuple)) or len(p) != 2 for p in pairs):
        errors.append("network.pauli_pairs: expected a list of [P, Q] label pairs")
        pairs = []
    axes = section.get('field_axes', ['Z'])
    if not isinstance(axes, list):
        errors.append("network.field_axes: expected a list of axis labels")
        axes = []
    if num_qubits is None or None in register:
        return None

    edges = section.get('edges', 'chain')
    if isinstance(edges, str):
        if edges not in TOPOLOGIES:
            errors.append(f"network.edges: unknown topology '{edges}' (chain, ring, complete or a list)")
            return None
        edges = TOPOLOGIES[edges](num_qubits)
    elif isinstance(edges, list) and all(isinstance(e, (list, tuple)) and len(e) == 2 for e in edges):
        edges = [(_to_int(e[0], f'network.edges[{i}]', errors), _to_int(e[1], f'network.edges[{i}]', errors))
                 for i, e in enumerate(edges)]
    else:
        errors.append("network.edges: expected a topology name or a list of [i, j] pairs")
        return None

    fields = section.get('fields', 'all')
    if fields is None or fields == 'none':
        fields = []
    elif fields == 'all':
        fields = all_field_sites(num_qubits, [str(a).upper() for a in axes])
    elif isinstance(fields, list) and all(isinstance(f, (list, tuple)) and len(f) == 2 for f in fields):
        fields = [(_to_int(f[0], f'network.fields[{i}]', errors), str(f[1]).upper())
                  for i, f in enumerate(fields)]
    else:
        errors.append("network.fields: expected 'all', 'none' or a list of [site, axis] pairs")
        return None

    if any(q is None for edge in edges for q in edge) or any(q is None for q, _ in fields):
        return None

    net = QubitNetwork(
        num_qubits=num_qubits,
        register=tuple(register),
        edges=tuple(edges),
        field_sites=tuple(fields),
        model=CouplingModel(kind=kind, pauli_pairs=tuple(tuple(p) for p in pairs),
                            local_field_axes=tuple(axes)),
    )
    report = validate_network(net)
    errors.extend(f"network: {e}" for e in report.errors)
    for warning in report.warnings:
        logger.warning(f"network: {warning}")
    return net if report.ok else None


def _parse_unitary(rows: Any, errors: List[str]) -> Optional[np.ndarray]:
    try:
        arr = np.asarray(rows, dtype=float)
        if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"shape {arr.shape}")
    except (TypeError, ValueError) as e:
        errors.append(f"target.unitary: expected a square row-major list of [re, im] pairs ({e})")
        return None
    matrix = arr[:, :, 0] + 1j * arr[:, :, 1]
    try:
        return check_unitary(matrix)
    except ValueError as e:
        errors.append(f"target.unitary: {e}")
        return None


def _parse_target(section: Any, net: Optional[QubitNetwork], errors: List[str]):
    """Returns (matrix, normalized spec, planted weights)"""
    if not isinstance(section, dict):
        errors.append("target: section is required and must be a mapping")
        return None, None, None
    kinds = [k for k in ('gate', 'unitary', 'planted') if k in section]
    if len(kinds) != 1:
        errors.append("target: specify exactly one of 'gate', 'unitary' or 'planted'")
        return None, None, None
    if net is None:
        return None, None, None
    n = net.num_register

    if kinds[0] == 'gate':
        num_qubits = section.get('num_qubits')
        if num_qubits is not None:
            num_qubits = _to_int(num_qubits, 'target.num_qubits', errors)
        name = str(section['gate'])
        try:
            gate = NamedGate.parse(name, num_qubits)
        except ValueError as e:
            if 'explicit number of qubits' not in str(e):
                errors.append(f"target.gate: {e}")
                return None, None, None
            gate = NamedGate.parse(name, n)
        if gate.num_qubits != n:
            errors.append(f"target.gate: {gate.name} acts on {gate.num_qubits} qubits, register has {n}")
            return None, None, None
        return build_gate(gate), {'gate': gate.name, 'num_qubits': gate.num_qubits}, None

    if kinds[0] == 'unitary':
        matrix = _parse_unitary(section['unitary'], errors)
        if matrix is None:
            return None, None, None
        if matrix.shape[0] != 2 ** n:
            errors.append(f"target.unitary: dimension {matrix.shape[0]} does not match {n} register qubits")
            return None, None, None
        spec = {'unitary': [[[float(z.real), float(z.imag)] for z in row] for row in matrix]}
        return matrix, spec, None

    planted = section['planted']
    if not isinstance(planted, dict):
        errors.append("target.planted: expected a mapping with 'seed' and optional 'scale'")
        return None, None, None
    seed = _to_int(planted.get('seed', 0), 'target.planted.seed', errors)
    scale = _to_float(planted.get('scale', 1.0), 'target.planted.scale', errors)
    if seed is None or scale is None:
        return None, None, None
    if net.num_ancillas:
        errors.append("target.planted: planted targets need a network without ancillas")
        return None, None, None
    matrix, w_star = planted_target(net, seed, scale)
    return matrix, {'planted': {'seed': seed, 'scale': scale}}, [float(x) for x in w_star]


def _parse_train(section: Any, errors: List[str]) -> Optional[TrainConfig]:
    if section is None:
        section = {}
    if not isinstance(section, dict):
        errors.append("train: expected a mapping")
        return None
    known = set(TrainConfig().to_dict())
    for key in section:
        if key not in known:
            errors.append(f"train.{key}: unknown field")
    values: Dict[str, Any] = {}
    for key, value in section.items():
        if key in TRAIN_INT_FIELDS:
            values[key] = _to_int(value, f'train.{key}', errors)
        elif key in TRAIN_FLOAT_FIELDS:
            values[key] = _to_float(value, f'train.{key}', errors)
        elif key == 'weight_init':
            if isinstance(value, list):
                values[key] = [_to_float(x, f'train.weight_init[{i}]', errors) for i, x in enumerate(value)]
            else:
                values[key] = str(value)
        elif key == 'box_bounds':
            values[key] = None if value is None else copy.deepcopy(value)
        elif key == 'stop_on_success':
            values[key] = bool(value)
    malformed = [k for k, v in values.items() if v is None and k != 'box_bounds']
    config = TrainConfig(**{k: v for k, v in values.items() if k not in malformed})
    errors.extend(f"train.{p}" for p in config.problems())
    return None if malformed else config


def validate_config(config: Dict[str, Any]) -> List[str]:
    """Validate configuration; returns one 'field.path: message' string per problem"""
    try:
        parse_experiment(config)
    except ConfigError as e:
        return e.errors
    return []


def parse_experiment(config: Dict[str, Any]) -> ExperimentConfig:
    """Build an ExperimentConfig, raising ConfigError listing every problem"""
    errors: List[str] = []

    version = config.get('schema_version', SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        errors.append(f"schema_version: unsupported version {version!r} (expected {SCHEMA_VERSION})")

    net = _parse_network(config.get('network'), errors)
    target, target_spec, w_star = _parse_target(config.get('target'), net, errors)
    train = _parse_train(config.get('train'), errors)

    ancilla_state = None
    if net is not None:
        label = config.get('ancilla_state')
        if label is None:
            label = '0' * net.num_ancillas
        if not isinstance(label, str):
            # YAML reads 01 as 1 and 010 as octal 8
            errors.append(f"ancilla_state: expected a quoted bit string such as \"01\", got {label!r}")
        else:
            try:
                AncillaPrep.from_label(label, net.num_ancillas)
                ancilla_state = label
            except ValueError as e:
                errors.append(f"ancilla_state: {e}")

    if train is not None and net is not None:
        if isinstance(train.weight_init, list) and len(train.weight_init) != net.num_weights:
            errors.append(f"train.weight_init: {len(train.weight_init)} values for {net.num_weights} weights")
        if train.box_bounds is not None:
            try:
                weight_bounds(train, net.num_weights)
            except (TypeError, ValueError) as e:
                errors.append(f"train.box_bounds: {e}")

    size = _to_int(config.get('validation_set_size', DEFAULT_VALIDATION_SIZE), 'validation_set_size', errors)
    if size is not None and size < 1:
        errors.append("validation_set_size: must be >= 1")

    sections = {}
    for name, defaults in (('output', DEFAULT_OUTPUT), ('logging', DEFAULT_LOGGING), ('monitor', DEFAULT_MONITOR)):
        value = config.get(name) or {}
        if not isinstance(value, dict):
            errors.append(f"{name}: expected a mapping")
            value = {}
        merged = dict(defaults)
        merged.update(value)
        sections[name] = merged

    if errors:
        for error in errors:
            logger.error(f"Config error: {error}")
        raise ConfigError(errors)

    return ExperimentConfig(
        network=net,
        target=target,
        target_spec=target_spec,
        ancilla_state=ancilla_state,
        train=train,
        validation_set_size=size,
        output=sections['output'],
        logging=sections['logging'],
        monitor=sections['monitor'],
        planted_weights=w_star,
    )


def load_experiment(file_path: str, seed: Optional[int] = None, out_dir: Optional[str] = None,
                    restarts: Optional[int] = None) -> ExperimentConfig:
    """Load, apply command-line overrides, and parse an experiment config"""
    config = get_config(file_path)
    if not isinstance(config.get('train'), dict):
        config['train'] = {}
    if seed is not None:
        config['train']['seed'] = seed
    if restarts is not None:
        config['train']['restarts'] = restarts
    if out_dir is not None:
        if not isinstance(config.get('output'), dict):
            config['output'] = {}
        config['output']['dir'] = out_dir
    return parse_experiment(config)


def save_config(config: Dict[str, Any], file_path: str = "config.yaml") -> bool:
    """Save configuration to YAML file"""
    try:
        with open(file_path, 'w', encoding='utf-8') as f:
            yaml.dump(config, f, default_flow_style=False, allow_unicode=True, sort_keys=True)
        return True
    except Exception as e:
        logger.error(f"Error saving config: {e}")
        return False


def create_default_config(file_path: str = "config.yaml") -> bool:
    """Create default configuration file (planted two-qubit Heisenberg problem)"""
    default_config = {
        'schema_version': SCHEMA_VERSION,
        'network': {
            'num_qubits': 2,
            'register': [0, 1],
            'coupling': 'heisenberg',
            'field_axes': ['Z'],
            'edges': 'chain',
            'fields': 'all',
        },
        'target': {'planted': {'seed': 7, 'scale': 1.0}},
        'ancilla_state': None,
        'train': TrainConfig(restarts=20, seed=2024).to_dict(),
        'validation_set_size': DEFAULT_VALIDATION_SIZE,
        'output': dict(DEFAULT_OUTPUT),
        'logging': dict(DEFAULT_LOGGING),
        'monitor': dict(DEFAULT_MONITOR),
    }
    return save_config(default_config, file_path)


def main():
    """Test configuration loading"""
    file_path = sys.argv[1] if len(sys.argv) > 1 else "config.yaml"
    print(f"🔧 Checking {file_path}...")
    try:
        experiment = parse_experiment(get_config(file_path))
    except ConfigError as e:
        print("❌ Configuration validation failed:")
        for error in e.errors:
            print(f"  - {error}")
        return
    net = experiment.network
    print("✅ Configuration is valid")
    print(f"📊 Network: {net.num_qubits} qubits, register {list(net.register)}, {net.num_weights} weights")
    print(f"🎯 Target: {experiment.target_spec if 'unitary' not in experiment.target_spec else 'explicit unitary'}")


if __name__ == "__main__":
    main()
