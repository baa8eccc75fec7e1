#!/usr/bin/env python3
"""
Trainer for qteach
Online stochastic gradient ascent on the gate fidelity: draw a Haar-random
input, take L gradient steps w <- w + kappa * grad F_psi(w), decay kappa as
kappa0 * s^(-decay_exponent), and stop when the exact average fidelity at a
checkpoint is within target_error of 1 or the step budget runs out.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from channel_evaluator import (
    AncillaPrep, exact_average_fidelity, pair_fidelity, prepare_input,
    register_ancilla_split, to_network_order,
)
from network_model import QubitNetwork, build_hamiltonian, check_weights, generator_stack, require_valid
from sampling import TrainingPair, generate_training_pair, make_rng
from tensor_algebra import check_unitary, divided_differences, expm_hamiltonian, hermitian_eig

logger = logging.getLogger(__name__)

ProgressCallback = Callable[[int, int, float], None]


@dataclass
class TrainConfig:
    kappa0: float = 0.3
    decay_exponent: float = 0.5
    inner_steps: int = 1
    max_outer_steps: int = 20000
    target_error: float = 1e-3
    weight_init: Union[str, List[float]] = 'uniform'
    init_scale: float = math.pi
    restarts: int = 1
    box_bounds: Optional[List[Any]] = None
    seed: int = 0
    checkpoint_every: int = 50
    workers: int = 1
    stop_on_success: bool = True

    def problems(self) -> List[str]:
        """Invariant violations, as 'field: message' strings"""
        errors = []
        if not self.kappa0 > 0:
            errors.append("kappa0: must be > 0")
        if self.decay_exponent < 0:
            errors.append("decay_exponent: must be >= 0")
        if self.inner_steps < 1:
            errors.append("inner_steps: must be >= 1")
        if self.max_outer_steps < 0:
            errors.append("max_outer_steps: must be >= 0")
        if not 0 < self.target_error < 1:
            errors.append("target_error: must lie strictly between 0 and 1")
        if isinstance(self.weight_init, str) and self.weight_init not in ('uniform', 'zeros'):
            errors.append(f"weight_init: unknown scheme '{self.weight_init}' (uniform, zeros or a list)")
        if not self.init_scale > 0:
            errors.append("init_scale: must be > 0")
        if self.restarts < 1:
            errors.append("restarts: must be >= 1")
        if self.checkpoint_every < 1:
            errors.append("checkpoint_every: must be >= 1")
        if self.workers < 1:
            errors.append("workers: must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            errors.append("seed: must be a 64-bit unsigned integer")
        return errors

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kappa0': self.kappa0,
            'decay_exponent': self.decay_exponent,
            'inner_steps': self.inner_steps,
            'max_outer_steps': self.max_outer_steps,
            'target_error': self.target_error,
            'weight_init': self.weight_init,
            'init_scale': self.init_scale,
            'restarts': self.restarts,
            'box_bounds': self.box_bounds,
            'seed': self.seed,
            'checkpoint_every': self.checkpoint_every,
            'workers': self.workers,
            'stop_on_success': self.stop_on_success,
        }


class CurvePoint(NamedTuple):
    step: int
    exact_fidelity: float
    best_fidelity: float
    learning_rate: float


@dataclass
class TrainState:
    """Evolving state of one training run"""
    step: int
    weights: np.ndarray
    learning_rate: float
    best_weights: np.ndarray
    best_fidelity: float = -math.inf
    curve: List[CurvePoint] = field(default_factory=list)
    updates: int = 0

    def checkpoint(self, fidelity_value: float) -> None:
        if fidelity_value > self.best_fidelity:
            self.best_fidelity = fidelity_value
            self.best_weights = self.weights.copy()
        self.curve.append(CurvePoint(self.step, fidelity_value, self.best_fidelity, self.learning_rate))


@dataclass
class TrainResult:
    weights: np.ndarray
    exact_fidelity: float
    error: float
    converged: bool
    steps_used: int
    updates: int
    learning_curve: List[CurvePoint]
    seed: int
    restart_index: int

    def summary(self) -> Dict[str, Any]:
        return {
            'restart_index': self.restart_index,
            'exact_fidelity': self.exact_fidelity,
            'error': self.error,
            'converged': self.converged,
            'steps_used': self.steps_used,
            'updates': self.updates,
        }

    def to_dict(self) -> Dict[str, Any]:
        result = self.summary()
        result['seed'] = self.seed
        result['weights'] = [float(x) for x in self.weights]
        return result


@dataclass
class MultiRestartResult:
    best: TrainResult
    restarts: List[TrainResult]


def learning_rate(config: TrainConfig, s: int) -> float:
    """kappa0 * s^(-decay_exponent)"""
    if s < 1:
        raise ValueError(f"Step counter starts at 1, got {s}")
    return config.kappa0 * s ** (-config.decay_exponent)


def weight_bounds(config: TrainConfig, num_weights: int) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """Box bounds as (lo, hi) arrays; a single [lo, hi] pair applies to every weight"""
    bounds = config.box_bounds
    if bounds is None:
        return None
    arr = np.asarray(bounds, dtype=float)
    if arr.shape == (2,):
        arr = np.tile(arr, (num_weights, 1))
    if arr.shape != (num_weights, 2):
        raise ValueError(f"box_bounds must be [lo, hi] or {num_weights} such pairs, got shape {arr.shape}")
    if np.any(arr[:, 0] > arr[:, 1]):
        raise ValueError("box_bounds has a lower bound above its upper bound")
    return arr[:, 0], arr[:, 1]


def initial_weights(net: QubitNetwork, config: TrainConfig, rng: np.random.Generator) -> np.ndarray:
    if isinstance(config.weight_init, str):
        if config.weight_init == 'zeros':
            return np.zeros(net.num_weights)
        if config.weight_init == 'uniform':
            return rng.uniform(-config.init_scale, config.init_scale, size=net.num_weights)
        raise ValueError(f"Unknown weight initialization '{config.weight_init}'")
    return check_weights(net, config.weight_init).copy()


def pair_fidelity_and_gradient(net: QubitNetwork, w: Sequence[float], pair: TrainingPair,
                               target: np.ndarray, anc: AncillaPrep,
                               generators: Optional[np.ndarray] = None) -> Tuple[float, np.ndarray]:
    """
    Pair fidelity F = <T|Tr_anc|eta_t><eta_t| |T> and its analytic gradient.

    With chi = (|T><T| (x) I) eta_t the k-th component is
    2 Re <chi| dU_k |eta_0>, where dU_k is the directional derivative of
    e^{-iH} along h_k. All K components share one eigendecomposition of H:
    in the eigenbasis dU_k = V (Gamma o V^dag h_k V) V^dag, so each
    component reduces to 2 Re sum_ij (h_k)_ij Q_ij with
    Q = conj(V) ((V^dag chi)^* (V^dag eta_0)^T o Gamma) V^T.

    `generators` replaces the network generators (used to inject faults in
    gradient checks).
    """
    stack = generator_stack(net) if generators is None else np.asarray(generators, dtype=complex)
    spectral = hermitian_eig(build_hamiltonian(net, w))
    unitary = expm_hamiltonian(None, spectral=spectral)

    eta_0 = prepare_input(net, pair.input_state, anc)
    eta_t = unitary @ eta_0
    target_state = np.asarray(target, dtype=complex) @ pair.input_state

    overlaps = target_state.conj() @ register_ancilla_split(eta_t, net)
    fid = float(np.sum(np.abs(overlaps) ** 2))
    chi = to_network_order(np.kron(target_state, overlaps), net)

    v = spectral.eigenvectors
    a = v.conj().T @ chi
    b = v.conj().T @ eta_0
    weighted = np.outer(a.conj(), b) * divided_differences(spectral.eigenvalues)
    q = v.conj() @ weighted @ v.T
    grad = 2.0 * np.real(np.einsum('kij,ij->k', stack, q)) if len(stack) else np.zeros(0)
    return min(1.0, fid), grad


def pair_fidelity_gradient(net: QubitNetwork, w: Sequence[float], pair: TrainingPair,
                           target: np.ndarray, anc: AncillaPrep,
                           generators: Optional[np.ndarray] = None) -> np.ndarray:
    """Analytic gradient of the single-pair fidelity with respect to w"""
    return pair_fidelity_and_gradient(net, w, pair, target, anc, generators=generators)[1]


def finite_difference_gradient(net: QubitNetwork, w: Sequence[float], pair: TrainingPair,
                               target: np.ndarray, anc: AncillaPrep, step: float = 1e-5) -> np.ndarray:
    """Central differences of pair_fidelity, one weight at a time"""
    if not step > 0:
        raise ValueError(f"Finite-difference step must be positive, got {step}")
    w = np.asarray(w, dtype=float)
    grad = np.zeros_like(w)
    for k in range(w.size):
        shift = np.zeros_like(w)
        shift[k] = step
        plus = pair_fidelity(net, w + shift, pair, target, anc)
        minus = pair_fidelity(net, w - shift, pair, target, anc)
        grad[k] = (plus - minus) / (2 * step)
    return grad


def _check_problem(net: QubitNetwork, target: np.ndarray, anc: AncillaPrep) -> np.ndarray:
    require_valid(net)
    target = check_unitary(target)
    d = 2 ** net.num_register
    if target.shape != (d, d):
        raise ValueError(f"Target of shape {target.shape} does not act on {net.num_register} register qubits")
    if anc.state.shape != (2 ** net.num_ancillas,):
        raise ValueError(f"Ancilla state does not match {net.num_ancillas} ancilla qubits")
    return target


def sgd_train(net: QubitNetwork, target: np.ndarray, anc: AncillaPrep, config: TrainConfig,
              restart_index: int = 0, progress: Optional[ProgressCallback] = None) -> TrainResult:
    """One run of online stochastic gradient ascent; returns the best weights seen"""
    target = _check_problem(net, target, anc)
    problems = config.problems()
    if problems:
        raise ValueError("Invalid training config: " + "; ".join(problems))

    rng = make_rng(config.seed, restart_index)
    bounds = weight_bounds(config, net.num_weights)
    w = initial_weights(net, config, rng)
    if bounds is not None:
        w = np.clip(w, *bounds)

    state = TrainState(step=0, weights=w, learning_rate=config.kappa0, best_weights=w.copy())
    state.checkpoint(exact_average_fidelity(net, w, target, anc))
    logger.info(f"Restart {restart_index}: {net.num_weights} weights, "
                f"initial fidelity {state.best_fidelity:.6f}")
    if progress is not None:
        progress(restart_index, 0, state.best_fidelity)

    s = 0
    while 1.0 - state.best_fidelity >= config.target_error and s < config.max_outer_steps:
        s += 1
        kappa = learning_rate(config, s)
        pair = generate_training_pair(target, net.num_register, rng)
        for _ in range(config.inner_steps):
            _, grad = pair_fidelity_and_gradient(net, state.weights, pair, target, anc)
            w = state.weights + kappa * grad
            if bounds is not None:
                w = np.clip(w, *bounds)
            state.weights = w
            state.updates += 1
        state.step = s
        state.learning_rate = kappa

        if s % config.checkpoint_every == 0 or s == config.max_outer_steps:
            state.checkpoint(exact_average_fidelity(net, state.weights, target, anc))
            logger.debug(f"Restart {restart_index} step {s}: F={state.curve[-1].exact_fidelity:.8f} "
                         f"best={state.best_fidelity:.8f} kappa={kappa:.3e}")
            if progress is not None:
                progress(restart_index, s, state.best_fidelity)

    best = state.best_fidelity
    error = 1.0 - best
    result = TrainResult(
        weights=state.best_weights,
        exact_fidelity=best,
        error=error,
        converged=bool(error < config.target_error),
        steps_used=s,
        updates=state.updates,
        learning_curve=state.curve,
        seed=config.seed,
        restart_index=restart_index,
    )
    status = "converged" if result.converged else "budget exhausted"
    logger.info(f"Restart {restart_index}: {status} after {s} steps, error {error:.3e}")
    return result


def select_best(results: Sequence[TrainResult]) -> TrainResult:
    """Highest exact fidelity; ties go to the lowest restart index"""
    return max(results, key=lambda r: (r.exact_fidelity, -r.restart_index))


def multi_restart(net: QubitNetwork, target: np.ndarray, anc: AncillaPrep, config: TrainConfig,
                  progress: Optional[ProgressCallback] = None,
                  on_finish: Optional[Callable[[int], None]] = None) -> MultiRestartResult:
    """
    Run sgd_train on restart streams 0..restarts-1 of the config seed.

    Sequential runs stop at the first converged restart when
    stop_on_success is set; pooled runs always complete every restart.
    `on_finish` receives the index of each restart as it returns.
    """
    if config.restarts < 1:
        raise ValueError("Need at least one restart")

    def run(r: int) -> TrainResult:
        try:
            return sgd_train(net, target, anc, config, restart_index=r, progress=progress)
        finally:
            if on_finish is not None:
                on_finish(r)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(run, range(config.restarts)))
    else:
        results = []
        for r in range(config.restarts):
            result = run(r)
            results.append(result)
            if result.converged and config.stop_on_success:
                break

    best = select_best(results)
    logger.info(f"Best of {len(results)} restarts: restart {best.restart_index}, error {best.error:.3e}")
    return MultiRestartResult(best=best, restarts=results)


def main():
    """Teach a single-qubit rotation"""
    from network_model import CouplingModel
    from channel_evaluator import planted_target
    print("🔧 Testing trainer...")
    net = QubitNetwork(num_qubits=1, register=(0,), field_sites=((0, 'X'), (0, 'Z')),
                       model=CouplingModel('ising_zz', local_field_axes=('X', 'Z')))
    target, _ = planted_target(net, seed=3)
    result = multi_restart(net, target, AncillaPrep.zeros(0), TrainConfig(restarts=3, seed=11))
    print(f"📊 Converged: {result.best.converged}, error: {result.best.error:.2e}")


if __name__ == "__main__":
    main()
