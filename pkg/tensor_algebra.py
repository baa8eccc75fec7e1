#!/usr/bin/env python3
"""
Tensor Algebra for qteach
Dense complex linear algebra for multi-qubit systems: Kronecker products,
Hermitian spectral decomposition, matrix exponentials and their directional
derivatives, partial trace and state fidelity.

Bit ordering is fixed everywhere: qubit 0 is the most significant bit of a
basis index, so np.kron(a, b) puts `a` on the lower-numbered qubit.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Sequence

import numpy as np
from scipy import linalg

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
NORM_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
UNITARY_TOL = 1e-10
FIDELITY_OVERSHOOT_TOL = 1e-10
DEGENERACY_TOL = 1e-9

PAULI = {
    'I': np.eye(2, dtype=complex),
    'X': np.array([[0, 1], [1, 0]], dtype=complex),
    'Y': np.array([[0, -1j], [1j, 0]], dtype=complex),
    'Z': np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (ascending) and the unitary matrix of eigenvector columns"""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def num_qubits_for_dim(dim: int) -> int:
    """Return n such that dim == 2**n, or raise ValueError"""
    n = int(dim).bit_length() - 1
    if dim < 1 or 2 ** n != dim:
        raise ValueError(f"Dimension {dim} is not a power of two")
    return n


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; `a` acts on the more significant qubits"""
    return np.kron(a, b)


def kron_all(factors: Iterable[np.ndarray]) -> np.ndarray:
    result = np.ones((1, 1), dtype=complex)
    for factor in factors:
        result = np.kron(result, factor)
    return result


def embed_paulis(labels: dict, num_qubits: int) -> np.ndarray:
    """Tensor product of single-qubit Paulis {qubit: label}, identity elsewhere"""
    return kron_all(PAULI[labels.get(q, 'I')] for q in range(num_qubits))


def check_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Raise ValueError naming the worst entry if h is not Hermitian"""
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"Expected a square matrix, got shape {h.shape}")
    asym = np.abs(h - h.conj().T)
    worst = np.unravel_index(int(np.argmax(asym)), asym.shape) if asym.size else (0, 0)
    scale = max(1.0, float(np.max(np.abs(h)))) if h.size else 1.0
    if asym.size and asym[worst] > tol * scale:
        raise ValueError(
            f"Matrix is not Hermitian: max asymmetry {asym[worst]:.3e} "
            f"at entry {tuple(int(i) for i in worst)}"
        )
    return h


def check_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"Expected a square matrix, got shape {u.shape}")
    deviation = np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0]))
    if deviation > tol:
        raise ValueError(f"Matrix is not unitary: ||U^dag U - I||_F = {deviation:.3e}")
    return u


def check_pure_state(psi: np.ndarray, num_qubits: int = None) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise ValueError(f"Pure state must be a vector, got shape {psi.shape}")
    n = num_qubits_for_dim(psi.shape[0])
    if num_qubits is not None and n != num_qubits:
        raise ValueError(f"Expected a {num_qubits}-qubit state, got {n} qubits")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"State is not normalized: norm = {norm:.15f}")
    return psi


def check_density_matrix(rho: np.ndarray) -> np.ndarray:
    rho = check_hermitian(rho)
    num_qubits_for_dim(rho.shape[0])
    trace = np.trace(rho).real
    if abs(trace - 1.0) > TRACE_TOL:
        raise ValueError(f"Density matrix trace is {trace:.15f}, expected 1")
    smallest = np.linalg.eigvalsh(rho)[0]
    if smallest < -PSD_TOL:
        raise ValueError(f"Density matrix has negative eigenvalue {smallest:.3e}")
    return rho


def hermitian_eig(h: np.ndarray) -> SpectralDecomposition:
    """Spectral decomposition of a Hermitian matrix"""
    h = check_hermitian(h)
    eigenvalues, eigenvectors = linalg.eigh(h)
    return SpectralDecomposition(eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def expm_hamiltonian(h: np.ndarray, t: float = 1.0,
                     spectral: SpectralDecomposition = None) -> np.ndarray:
    """
    Unitary e^{-itH} computed as V diag(e^{-it lambda}) V^dag.

    A precomputed spectral decomposition of h may be passed in to avoid a
    second eigendecomposition.
    """
    if spectral is None:
        spectral = hermitian_eig(h)
    v = spectral.eigenvectors
    phases = np.exp(-1j * t * spectral.eigenvalues)
    return (v * phases) @ v.conj().T


def divided_differences(eigenvalues: np.ndarray, t: float = 1.0) -> np.ndarray:
    """
    First divided differences of f(x) = e^{-itx} on the spectrum.

    Entries with |lambda_m - lambda_n| <= DEGENERACY_TOL use the derivative
    limit -it e^{-it lambda_m}.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    f = np.exp(-1j * t * lam)
    diff = lam[:, None] - lam[None, :]
    degenerate = np.abs(diff) <= DEGENERACY_TOL
    safe = np.where(degenerate, 1.0, diff)
    gamma = (f[:, None] - f[None, :]) / safe
    limit = np.broadcast_to((-1j * t * f)[:, None], gamma.shape)
    return np.where(degenerate, limit, gamma)


def expm_directional_derivative(h: np.ndarray, direction: np.ndarray, t: float = 1.0,
                                spectral: SpectralDecomposition = None) -> np.ndarray:
    """d/ds e^{-it(H + sD)} at s = 0 (Daleckii-Krein formula)"""
    direction = check_hermitian(direction)
    if spectral is None:
        spectral = hermitian_eig(h)
    if direction.shape != spectral.eigenvectors.shape:
        raise ValueError(
            f"Direction shape {direction.shape} does not match Hamiltonian "
            f"shape {spectral.eigenvectors.shape}"
        )
    v = spectral.eigenvectors
    gamma = divided_differences(spectral.eigenvalues, t)
    return v @ (gamma * (v.conj().T @ direction @ v)) @ v.conj().T


def _check_keep(keep: Sequence[int], num_qubits: int) -> List[int]:
    keep = [int(q) for q in keep]
    if not keep:
        raise ValueError("Partial trace needs a nonempty set of qubits to keep")
    if len(set(keep)) != len(keep):
        raise ValueError(f"Duplicate qubit indices in keep set {keep}")
    bad = [q for q in keep if q < 0 or q >= num_qubits]
    if bad:
        raise ValueError(f"Qubit indices {bad} out of range for {num_qubits} qubits")
    return keep


def partial_trace(state: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """
    Reduced density matrix on the qubits in `keep`.

    Accepts a pure state vector or a density matrix. The kept qubits appear
    in the order given by `keep`, so passing a sorted list yields the usual
    ascending order.
    """
    state = np.asarray(state, dtype=complex)
    n = num_qubits_for_dim(state.shape[0])
    keep = _check_keep(keep, n)
    rest = [q for q in range(n) if q not in keep]
    d_keep, d_rest = 2 ** len(keep), 2 ** len(rest)

    if state.ndim == 1:
        m = state.reshape([2] * n).transpose(keep + rest).reshape(d_keep, d_rest)
        return m @ m.conj().T

    tensor = state.reshape([2] * (2 * n))
    order = keep + rest + [n + q for q in keep] + [n + q for q in rest]
    tensor = tensor.transpose(order).reshape(d_keep, d_rest, d_keep, d_rest)
    return np.einsum('ajbj->ab', tensor)


def fidelity(target: np.ndarray, state: np.ndarray) -> float:
    """<psi|rho|psi> for a pure target and a density matrix"""
    target = np.asarray(target, dtype=complex)
    state = np.asarray(state, dtype=complex)
    if state.shape != (target.shape[0], target.shape[0]):
        raise ValueError(
            f"Dimension mismatch: target has length {target.shape[0]}, "
            f"state has shape {state.shape}"
        )
    value = float(np.real(np.vdot(target, state @ target)))
    if value > 1.0 + FIDELITY_OVERSHOOT_TOL or value < -FIDELITY_OVERSHOOT_TOL:
        raise ValueError(f"Non-physical state: fidelity {value:.15f} outside [0, 1]")
    return min(1.0, max(0.0, value))


def projector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def main():
    """Quick self-check of the analytic cases"""
    print("🔧 Testing tensor algebra...")
    u = expm_hamiltonian(np.pi / 2 * PAULI['X'])
    print(f"✅ exp(-i pi/2 X) = -iX: {np.allclose(u, -1j * PAULI['X'])}")
    bell = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    print(f"✅ Bell reduced state = I/2: {np.allclose(partial_trace(bell, [0]), np.eye(2) / 2)}")


if __name__ == "__main__":
    main()
