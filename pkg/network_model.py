#!/usr/bin/env python3
"""
Network Model for qteach
Qubit networks of register and ancilla qubits with weighted pairwise
couplings and local fields, and the Hamiltonian H(w) = sum_k w_k h_k.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Sequence, Tuple

import numpy as np

from tensor_algebra import embed_paulis

logger = logging.getLogger(__name__)

MAX_QUBITS = 10
PAULI_LABELS = ('X', 'Y', 'Z')

# Each inner tuple is one generator (one trainable weight) per edge
COUPLING_TERMS = {
    'ising_zz': ((('Z', 'Z'),),),
    'exchange_xy': ((('X', 'X'), ('Y', 'Y')),),
    'heisenberg': ((('X', 'X'), ('Y', 'Y'), ('Z', 'Z')),),
}
COUPLING_KINDS = tuple(COUPLING_TERMS) + ('custom',)


@dataclass(frozen=True)
class CouplingModel:
    """Physical coupling family for the network edges"""
    kind: str = 'heisenberg'
    pauli_pairs: Tuple[Tuple[str, str], ...] = ()
    local_field_axes: Tuple[str, ...] = ('Z',)

    def __post_init__(self):
        object.__setattr__(self, 'pauli_pairs', tuple(tuple(str(p).upper() for p in pair) for pair in self.pauli_pairs))
        object.__setattr__(self, 'local_field_axes', tuple(str(a).upper() for a in self.local_field_axes))

    def edge_generators(self) -> Tuple[Tuple[Tuple[str, str], ...], ...]:
        """Pauli-pair groups, one group per trainable weight on an edge"""
        if self.kind == 'custom':
            return tuple((tuple(pair),) for pair in self.pauli_pairs)
        return COUPLING_TERMS[self.kind]

    @property
    def terms_per_edge(self) -> int:
        if self.kind not in COUPLING_KINDS:
            return 0
        return len(self.edge_generators())

    def problems(self) -> List[str]:
        errors = []
        if self.kind not in COUPLING_KINDS:
            errors.append(f"Unknown coupling model '{self.kind}' (expected one of {', '.join(COUPLING_KINDS)})")
        if self.kind == 'custom':
            if not self.pauli_pairs:
                errors.append("Custom coupling model needs a nonempty list of Pauli pairs")
            for pair in self.pauli_pairs:
                if len(pair) != 2 or any(p not in PAULI_LABELS for p in pair):
                    errors.append(f"Invalid Pauli pair {pair}: labels must be X, Y or Z")
        for axis in self.local_field_axes:
            if axis not in PAULI_LABELS:
                errors.append(f"Invalid local field axis '{axis}'")
        return errors


@dataclass(frozen=True)
class QubitNetwork:
    """
    N' qubits, an ordered register of N of them, coupling edges and local
    field terms. The remaining qubits are ancillas, listed in ascending order.
    """
    num_qubits: int
    register: Tuple[int, ...]
    edges: Tuple[Tuple[int, int], ...] = ()
    field_sites: Tuple[Tuple[int, str], ...] = ()
    model: CouplingModel = field(default_factory=CouplingModel)

    def __post_init__(self):
        object.__setattr__(self, 'register', tuple(int(q) for q in self.register))
        object.__setattr__(self, 'edges', tuple((int(i), int(j)) for i, j in self.edges))
        object.__setattr__(self, 'field_sites', tuple((int(q), str(a)) for q, a in self.field_sites))

    @property
    def ancillas(self) -> Tuple[int, ...]:
        return tuple(q for q in range(self.num_qubits) if q not in self.register)

    @property
    def num_register(self) -> int:
        return len(self.register)

    @property
    def num_ancillas(self) -> int:
        return self.num_qubits - len(self.register)

    @property
    def dim(self) -> int:
        return 2 ** self.num_qubits

    @property
    def num_weights(self) -> int:
        """Generator count K"""
        return len(self.edges) * self.model.terms_per_edge + len(self.field_sites)

    def weight_labels(self) -> List[str]:
        labels = []
        for i, j in self.edges:
            for group in self.model.edge_generators():
                names = '+'.join(a + b for a, b in group)
                labels.append(f"{names}({i},{j})")
        for q, axis in self.field_sites:
            labels.append(f"{axis}({q})")
        return labels


@dataclass
class ValidationReport:
    errors: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


def chain_edges(num_qubits: int) -> List[Tuple[int, int]]:
    return [(i, i + 1) for i in range(num_qubits - 1)]


def ring_edges(num_qubits: int) -> List[Tuple[int, int]]:
    edges = chain_edges(num_qubits)
    if num_qubits > 2:
        edges.append((0, num_qubits - 1))
    return edges


def complete_edges(num_qubits: int) -> List[Tuple[int, int]]:
    return [(i, j) for i in range(num_qubits) for j in range(i + 1, num_qubits)]


def all_field_sites(num_qubits: int, axes: Sequence[str]) -> List[Tuple[int, str]]:
    return [(q, axis) for q in range(num_qubits) for axis in axes]


def validate_network(net: QubitNetwork) -> ValidationReport:
    """Collect every invariant violation; never raises"""
    report = ValidationReport()
    n = net.num_qubits

    if n < 1 or n > MAX_QUBITS:
        report.errors.append(f"Network size {n} outside the supported range 1..{MAX_QUBITS}")
    if not net.register:
        report.errors.append("Register is empty")
    if len(set(net.register)) != len(net.register):
        report.errors.append(f"Register indices are not distinct: {list(net.register)}")
    for q in net.register:
        if q < 0 or q >= n:
            report.errors.append(f"Register index {q} out of range for {n} qubits")

    report.errors.extend(net.model.problems())

    seen_edges = set()
    for i, j in net.edges:
        if i == j:
            report.errors.append(f"Self-loop on qubit {i}")
            continue
        if not (0 <= i < n and 0 <= j < n):
            report.errors.append(f"Edge ({i}, {j}) out of range for {n} qubits")
            continue
        key = (min(i, j), max(i, j))
        if key in seen_edges:
            report.errors.append(f"Duplicate edge ({i}, {j})")
        seen_edges.add(key)

    seen_fields = set()
    for q, axis in net.field_sites:
        if not 0 <= q < n:
            report.errors.append(f"Field site {q} out of range for {n} qubits")
        if axis not in PAULI_LABELS:
            report.errors.append(f"Field on qubit {q} has invalid axis '{axis}'")
        elif axis not in net.model.local_field_axes:
            report.errors.append(
                f"Field axis '{axis}' on qubit {q} not enabled by the coupling model "
                f"(local_field_axes={list(net.model.local_field_axes)})"
            )
        if (q, axis) in seen_fields:
            report.errors.append(f"Duplicate field term ({q}, {axis})")
        seen_fields.add((q, axis))

    connected = {q for edge in seen_edges for q in edge}
    for q in net.register:
        if 0 <= q < n and q not in connected and n > 1:
            report.warnings.append(f"Register qubit {q} has no couplings")

    return report


def require_valid(net: QubitNetwork) -> None:
    report = validate_network(net)
    if not report.ok:
        raise ValueError("Invalid qubit network: " + "; ".join(report.errors))
    for warning in report.warnings:
        logger.warning(warning)


@lru_cache(maxsize=64)
def _generator_stack(net: QubitNetwork) -> np.ndarray:
    require_valid(net)
    n = net.num_qubits
    terms = []
    for i, j in net.edges:
        for group in net.model.edge_generators():
            terms.append(sum(embed_paulis({i: a, j: b}, n) for a, b in group))
    for q, axis in net.field_sites:
        terms.append(embed_paulis({q: axis}, n))
    stack = np.array(terms, dtype=complex).reshape(len(terms), 2 ** n, 2 ** n)
    stack.setflags(write=False)
    logger.debug(f"Built {len(terms)} generators for a {n}-qubit network")
    return stack


def generator_terms(net: QubitNetwork) -> List[np.ndarray]:
    """Ordered Hermitian generators: edge terms in declaration order, then fields"""
    return list(_generator_stack(net))


def generator_stack(net: QubitNetwork) -> np.ndarray:
    """Generators as a read-only (K, 2^N', 2^N') array"""
    return _generator_stack(net)


def check_weights(net: QubitNetwork, w: Sequence[float]) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.shape[0] != net.num_weights:
        raise ValueError(f"Weight vector has length {w.size}, network has {net.num_weights} generators")
    if not np.all(np.isfinite(w)):
        raise ValueError("Weight vector contains non-finite entries")
    return w


def build_hamiltonian(net: QubitNetwork, w: Sequence[float]) -> np.ndarray:
    """H(w) = sum_k w_k h_k"""
    w = check_weights(net, w)
    stack = _generator_stack(net)
    if not len(w):
        return np.zeros((net.dim, net.dim), dtype=complex)
    return np.tensordot(w, stack, axes=1)


def main():
    """Print the generator layout of a small example network"""
    print("🔧 Testing network model...")
    net = QubitNetwork(
        num_qubits=3,
        register=(0, 1),
        edges=tuple(chain_edges(3)),
        field_sites=tuple(all_field_sites(3, ('Z',))),
        model=CouplingModel('heisenberg'),
    )
    report = validate_network(net)
    print(f"✅ Valid: {report.ok}, warnings: {report.warnings}")
    print(f"📊 Generators ({net.num_weights}): {', '.join(net.weight_labels())}")


if __name__ == "__main__":
    main()
