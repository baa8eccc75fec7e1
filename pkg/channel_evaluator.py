#!/usr/bin/env python3
"""
Channel Evaluator for qteach
The register channel E_w[psi]: prepare psi (x) alpha, evolve with e^{-iH(w)}
(t = 1, the weights absorb time), trace out the ancillas. Also provides the
Kraus form of E_w and the sampled and exact average gate fidelities.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from network_model import QubitNetwork, build_hamiltonian
from sampling import TrainingPair, make_rng, PLANTED_STREAM
from tensor_algebra import (
    check_pure_state, expm_hamiltonian, fidelity, partial_trace,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class AncillaPrep:
    """Fixed preparation |alpha> of the N' - N ancilla qubits"""
    state: np.ndarray

    @classmethod
    def zeros(cls, num_ancillas: int) -> 'AncillaPrep':
        state = np.zeros(2 ** num_ancillas, dtype=complex)
        state[0] = 1.0
        return cls(state)

    @classmethod
    def from_label(cls, label: str, num_ancillas: int) -> 'AncillaPrep':
        """Computational basis state from a bit string such as '01'"""
        label = label or '0' * num_ancillas
        if len(label) != num_ancillas or set(label) - {'0', '1'}:
            raise ValueError(f"Ancilla label '{label}' is not a {num_ancillas}-bit string")
        state = np.zeros(2 ** num_ancillas, dtype=complex)
        state[int(label, 2) if label else 0] = 1.0
        return cls(state)

    @property
    def num_qubits(self) -> int:
        return int(self.state.shape[0]).bit_length() - 1


def _check_ancilla(net: QubitNetwork, anc: AncillaPrep) -> np.ndarray:
    if anc.state.shape != (2 ** net.num_ancillas,):
        raise ValueError(
            f"Ancilla state has dimension {anc.state.shape[0]}, "
            f"network has {net.num_ancillas} ancilla qubits"
        )
    if abs(np.linalg.norm(anc.state) - 1.0) > 1e-12:
        raise ValueError("Ancilla state is not normalized")
    return anc.state


def _register_first_order(net: QubitNetwork) -> List[int]:
    return list(net.register) + list(net.ancillas)


def to_network_order(vec: np.ndarray, net: QubitNetwork) -> np.ndarray:
    """Reorder a (register..., ancillas...) vector into network qubit order"""
    order = _register_first_order(net)
    return vec.reshape([2] * net.num_qubits).transpose(np.argsort(order)).reshape(-1)


def register_ancilla_split(vec: np.ndarray, net: QubitNetwork) -> np.ndarray:
    """Network-order vector as a (2^N, 2^(N'-N)) register x ancilla matrix"""
    order = _register_first_order(net)
    return vec.reshape([2] * net.num_qubits).transpose(order).reshape(
        2 ** net.num_register, 2 ** net.num_ancillas)


def prepare_input(net: QubitNetwork, psi: np.ndarray, anc: AncillaPrep) -> np.ndarray:
    """eta_0 = psi (x) alpha with register qubit k placed at register[k]"""
    psi = check_pure_state(psi, net.num_register)
    alpha = _check_ancilla(net, anc)
    return to_network_order(np.kron(psi, alpha), net)


def propagator(net: QubitNetwork, w: Sequence[float]) -> np.ndarray:
    """e^{-iH(w)} on the full network"""
    return expm_hamiltonian(build_hamiltonian(net, w))


def evolve_register(net: QubitNetwork, w: Sequence[float], psi: np.ndarray,
                    anc: AncillaPrep, unitary: Optional[np.ndarray] = None) -> np.ndarray:
    """Register state E_w[psi] after unit-time evolution"""
    if unitary is None:
        unitary = propagator(net, w)
    eta_t = unitary @ prepare_input(net, psi, anc)
    return partial_trace(eta_t, net.register)


def kraus_operators(net: QubitNetwork, w: Sequence[float], anc: AncillaPrep,
                    unitary: Optional[np.ndarray] = None) -> List[np.ndarray]:
    """K_a = (I (x) <a|) e^{-iH(w)} (I (x) |alpha>) over the ancilla basis"""
    alpha = _check_ancilla(net, anc)
    if unitary is None:
        unitary = propagator(net, w)
    n = net.num_qubits
    order = _register_first_order(net)
    d_reg, d_anc = 2 ** net.num_register, 2 ** net.num_ancillas
    blocks = unitary.reshape([2] * (2 * n)).transpose(order + [n + q for q in order])
    blocks = blocks.reshape(d_reg, d_anc, d_reg, d_anc)
    return list(np.einsum('iajb,b->aij', blocks, alpha))


def apply_kraus(kraus: Sequence[np.ndarray], rho: np.ndarray) -> np.ndarray:
    return sum(k @ rho @ k.conj().T for k in kraus)


def kraus_completeness_error(kraus: Sequence[np.ndarray]) -> float:
    d = kraus[0].shape[1]
    total = sum(k.conj().T @ k for k in kraus)
    return float(np.linalg.norm(total - np.eye(d)))


def pair_fidelity(net: QubitNetwork, w: Sequence[float], pair: TrainingPair,
                  target: np.ndarray, anc: AncillaPrep,
                  unitary: Optional[np.ndarray] = None) -> float:
    """<psi|U^dag E_w[psi] U|psi> for one training pair"""
    rho = evolve_register(net, w, pair.input_state, anc, unitary=unitary)
    return fidelity(np.asarray(target) @ pair.input_state, rho)


def batch_fidelity(net: QubitNetwork, w: Sequence[float], pairs: Sequence[TrainingPair],
                   target: np.ndarray, anc: AncillaPrep) -> float:
    """Mean pair fidelity over a batch (compensated summation)"""
    if not pairs:
        raise ValueError("Cannot average fidelity over an empty batch")
    unitary = propagator(net, w)
    values = [pair_fidelity(net, w, pair, target, anc, unitary=unitary) for pair in pairs]
    return math.fsum(values) / len(values)


def validation_fidelities(net: QubitNetwork, w: Sequence[float], pairs: Sequence[TrainingPair],
                          target: np.ndarray, anc: AncillaPrep) -> Dict[str, float]:
    """Mean and worst-case pair fidelity over a held-out set"""
    if not pairs:
        raise ValueError("Validation set is empty")
    unitary = propagator(net, w)
    values = [pair_fidelity(net, w, pair, target, anc, unitary=unitary) for pair in pairs]
    return {
        'mean': math.fsum(values) / len(values),
        'min': min(values),
    }


def exact_average_fidelity(net: QubitNetwork, w: Sequence[float], target: np.ndarray,
                           anc: AncillaPrep, unitary: Optional[np.ndarray] = None) -> float:
    """
    Haar-averaged gate fidelity of E_w against the target.

    F_avg = (d F_e + 1) / (d + 1), with the entanglement fidelity
    F_e = sum_a |tr(U^dag K_a)|^2 / d^2 and d = 2^N.
    """
    target = np.asarray(target, dtype=complex)
    d = 2 ** net.num_register
    if target.shape != (d, d):
        raise ValueError(f"Target of shape {target.shape} does not act on {net.num_register} register qubits")
    kraus = kraus_operators(net, w, anc, unitary=unitary)
    target_dag = target.conj().T
    f_e = math.fsum(abs(np.trace(target_dag @ k)) ** 2 for k in kraus) / d ** 2
    value = (d * f_e + 1.0) / (d + 1.0)
    return float(min(1.0, value))


def planted_weights(net: QubitNetwork, seed: int, scale: float = 1.0) -> np.ndarray:
    """Seeded w* ~ uniform(-scale, scale) for planted-solution problems"""
    rng = make_rng(seed, PLANTED_STREAM)
    return rng.uniform(-scale, scale, size=net.num_weights)


def planted_target(net: QubitNetwork, seed: int, scale: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
    """Target e^{-iH(w*)} in register order and the planted weights w*; requires N' = N"""
    if net.num_ancillas:
        raise ValueError("Planted targets need a network without ancillas")
    w_star = planted_weights(net, seed, scale)
    return kraus_operators(net, w_star, AncillaPrep.zeros(0))[0], w_star


def main():
    """Excitation transfer across an XY-coupled pair"""
    from network_model import CouplingModel
    print("🔧 Testing channel evaluator...")
    net = QubitNetwork(num_qubits=2, register=(0,), edges=((0, 1),),
                       model=CouplingModel('exchange_xy', local_field_axes=()))
    rho = evolve_register(net, [np.pi / 4], np.array([0, 1], dtype=complex), AncillaPrep.zeros(1))
    print(f"✅ Register ends in |0><0|: {np.allclose(rho, np.diag([1, 0]))}")


if __name__ == "__main__":
    main()
