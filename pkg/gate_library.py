#!/usr/bin/env python3
"""
Gate Library for qteach
Textbook matrices of the named target gates, in the repo bit ordering
(qubit 0 = most significant bit). No global-phase normalization is applied.

Conventions:
  CNOT     control qubit 0, target qubit 1
  CZ       symmetric, phase -1 on |11>
  TOFFOLI  controls qubits 0 and 1, target qubit 2
  FREDKIN  control qubit 0, swaps qubits 1 and 2
  ISWAP    |01> -> i|10>, |10> -> i|01>
  QFT(n)   entries omega^{jk} / sqrt(2^n), omega = e^{2 pi i / 2^n}
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from tensor_algebra import PAULI

logger = logging.getLogger(__name__)

GATE_ARITY = {
    'X': 1, 'Y': 1, 'Z': 1, 'H': 1, 'S': 1, 'T': 1,
    'CNOT': 2, 'CZ': 2, 'SWAP': 2, 'ISWAP': 2,
    'TOFFOLI': 3, 'FREDKIN': 3,
    'QFT': None, 'I': None,
}


@dataclass(frozen=True)
class NamedGate:
    name: str
    num_qubits: int

    @classmethod
    def parse(cls, name: str, num_qubits: Optional[int] = None) -> 'NamedGate':
        """Accepts 'CNOT', 'qft' with num_qubits, or the compact form 'QFT3'"""
        key = name.strip().upper()
        for family in ('QFT', 'I'):
            suffix = key[len(family):]
            if key.startswith(family) and suffix.isdigit():
                if num_qubits is not None and int(suffix) != num_qubits:
                    raise ValueError(f"Gate '{name}' conflicts with num_qubits={num_qubits}")
                return cls(family, int(suffix))
        if key not in GATE_ARITY:
            raise ValueError(f"Unknown gate '{name}' (known: {', '.join(GATE_ARITY)})")
        arity = GATE_ARITY[key]
        if num_qubits is None:
            if arity is None:
                raise ValueError(f"Gate '{key}' needs an explicit number of qubits")
            num_qubits = arity
        return cls(key, int(num_qubits))


def qft_matrix(num_qubits: int) -> np.ndarray:
    dim = 2 ** num_qubits
    j, k = np.meshgrid(np.arange(dim), np.arange(dim), indexing='ij')
    # reduce the exponent mod dim first so every entry is an exact root of unity
    return np.exp(2j * np.pi * ((j * k) % dim) / dim) / np.sqrt(dim)


def _permutation_matrix(mapping: dict, dim: int) -> np.ndarray:
    """Basis permutation |i> -> |mapping[i]>, identity elsewhere"""
    perm = np.eye(dim, dtype=complex)
    for src, dst in mapping.items():
        perm[:, src] = 0
        perm[dst, src] = 1
    return perm


def build_gate(gate: NamedGate) -> np.ndarray:
    """Unitary matrix of a named gate"""
    name, n = gate.name, gate.num_qubits
    arity = GATE_ARITY.get(name, 0)
    if name not in GATE_ARITY:
        raise ValueError(f"Unknown gate '{name}'")
    if arity is not None and n != arity:
        raise ValueError(f"Gate {name} acts on {arity} qubits, not {n}")
    if n < 1:
        raise ValueError(f"Gate {name} needs at least one qubit")

    if name in ('X', 'Y', 'Z'):
        return PAULI[name].copy()
    if name == 'I':
        return np.eye(2 ** n, dtype=complex)
    if name == 'H':
        return np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    if name == 'S':
        return np.diag([1, 1j]).astype(complex)
    if name == 'T':
        return np.diag([1, np.exp(1j * np.pi / 4)]).astype(complex)
    if name == 'CNOT':
        return _permutation_matrix({2: 3, 3: 2}, 4)
    if name == 'CZ':
        return np.diag([1, 1, 1, -1]).astype(complex)
    if name == 'SWAP':
        return _permutation_matrix({1: 2, 2: 1}, 4)
    if name == 'ISWAP':
        u = np.eye(4, dtype=complex)
        u[1, 1] = u[2, 2] = 0
        u[1, 2] = u[2, 1] = 1j
        return u
    if name == 'TOFFOLI':
        return _permutation_matrix({6: 7, 7: 6}, 8)
    if name == 'FREDKIN':
        return _permutation_matrix({5: 6, 6: 5}, 8)
    return qft_matrix(n)


def gate_by_name(name: str, num_qubits: Optional[int] = None) -> np.ndarray:
    return build_gate(NamedGate.parse(name, num_qubits))


def main():
    """Print the unitarity deviation of every fixed-arity gate"""
    print("🔧 Testing gate library...")
    for name, arity in GATE_ARITY.items():
        u = gate_by_name(name, arity or 2)
        deviation = np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0]))
        print(f"✅ {name:8s} {u.shape[0]}x{u.shape[0]} deviation {deviation:.1e}")


if __name__ == "__main__":
    main()
