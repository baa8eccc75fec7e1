#!/usr/bin/env python3
"""
Sampling for qteach
Seeded random streams, Haar-random pure states and unitaries, and the
online training pairs (psi, U psi).
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy import linalg

from tensor_algebra import check_unitary, num_qubits_for_dim

logger = logging.getLogger(__name__)

# Reserved stream ids; restarts use 0, 1, 2, ...
VALIDATION_STREAM = 2 ** 32 - 1
PLANTED_STREAM = 2 ** 32 - 2
GRADCHECK_STREAM = 2 ** 32 - 3
DEFAULT_VALIDATION_SIZE = 200


def make_rng(seed: int, stream: Optional[int] = None) -> np.random.Generator:
    """
    PCG64 generator for (seed, stream). Distinct streams of the same seed are
    statistically independent and never interleave.
    """
    if seed < 0 or seed >= 2 ** 64:
        raise ValueError(f"Seed {seed} is not a 64-bit unsigned integer")
    spawn_key = () if stream is None else (int(stream),)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=spawn_key)))


@dataclass(frozen=True)
class TrainingPair:
    """Input state and the target gate applied to it"""
    input_state: np.ndarray
    target_output: np.ndarray


def haar_random_state(num_qubits: int, rng: np.random.Generator) -> np.ndarray:
    """Normalized vector of independent standard complex Gaussians"""
    if num_qubits < 1:
        raise ValueError(f"Need at least one qubit, got {num_qubits}")
    dim = 2 ** num_qubits
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)


def haar_random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Ginibre matrix orthonormalized by QR with the phases of diag(R) fixed"""
    if dim < 2:
        raise ValueError(f"Unitary dimension must be at least 2, got {dim}")
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def generate_training_pair(target: np.ndarray, num_qubits: int,
                           rng: np.random.Generator) -> TrainingPair:
    target = np.asarray(target, dtype=complex)
    if target.shape != (2 ** num_qubits, 2 ** num_qubits):
        raise ValueError(f"Target of shape {target.shape} does not act on {num_qubits} qubits")
    psi = haar_random_state(num_qubits, rng)
    return TrainingPair(input_state=psi, target_output=target @ psi)


def validation_set(target: np.ndarray, seed: int,
                   size: int = DEFAULT_VALIDATION_SIZE) -> List[TrainingPair]:
    """Fixed held-out pairs drawn from the validation stream of `seed`"""
    target = check_unitary(target)
    n = num_qubits_for_dim(target.shape[0])
    rng = make_rng(seed, VALIDATION_STREAM)
    return [generate_training_pair(target, n, rng) for _ in range(size)]


def main():
    """Print a couple of reproducible draws"""
    print("🔧 Testing Haar sampling...")
    first = haar_random_state(1, make_rng(7))
    second = haar_random_state(1, make_rng(7))
    print(f"✅ Reproducible: {np.array_equal(first, second)}")
    u = haar_random_unitary(4, make_rng(7))
    print(f"✅ Unitary deviation: {np.linalg.norm(u.conj().T @ u - np.eye(4)):.2e}")


if __name__ == "__main__":
    main()
