#!/usr/bin/env python3
"""
Tests for trainer
"""

import sys

import numpy as np
import pytest

from channel_evaluator import AncillaPrep, exact_average_fidelity, pair_fidelity, planted_target
from gate_library import gate_by_name
from network_model import CouplingModel, QubitNetwork, all_field_sites, chain_edges, complete_edges, generator_stack
from sampling import TrainingPair, generate_training_pair, haar_random_state, haar_random_unitary, make_rng
from trainer import (
    TrainConfig, finite_difference_gradient, initial_weights, learning_rate, multi_restart,
    pair_fidelity_and_gradient, pair_fidelity_gradient, select_best, sgd_train,
)

NO_ANCILLA = AncillaPrep.zeros(0)


def field_net(axes):
    return QubitNetwork(1, (0,), field_sites=tuple((0, a) for a in axes),
                        model=CouplingModel('heisenberg', local_field_axes=tuple(axes)))


def heisenberg_z_net(n=2):
    return QubitNetwork(n, tuple(range(n)), edges=tuple(chain_edges(n)),
                        field_sites=tuple(all_field_sites(n, ('Z',))), model=CouplingModel('heisenberg'))


def cz_net():
    return QubitNetwork(2, (0, 1), edges=((0, 1),), field_sites=((0, 'Z'), (1, 'Z')),
                        model=CouplingModel('ising_zz'))


def random_instance(rng, num_register, num_ancillas):
    n = num_register + num_ancillas
    net = QubitNetwork(
        num_qubits=n,
        register=tuple(int(q) for q in rng.permutation(n)[:num_register]),
        edges=tuple(complete_edges(n)),
        field_sites=tuple(all_field_sites(n, ('X', 'Z'))),
        model=CouplingModel(('heisenberg', 'exchange_xy', 'ising_zz')[int(rng.integers(3))],
                            local_field_axes=('X', 'Z')),
    )
    anc = AncillaPrep(haar_random_state(num_ancillas, rng)) if num_ancillas else NO_ANCILLA
    target = haar_random_unitary(2 ** num_register, rng)
    w = rng.uniform(-np.pi, np.pi, size=net.num_weights)
    return net, anc, target, w, generate_training_pair(target, num_register, rng)


def wrap(angle):
    return (angle + np.pi) % (2 * np.pi) - np.pi


def test_learning_rate_schedule():
    config = TrainConfig(kappa0=0.4, decay_exponent=0.5)
    assert learning_rate(config, 1) == 0.4
    assert learning_rate(config, 4) == 0.2
    rates = [learning_rate(config, s) for s in range(1, 100)]
    assert all(a > b for a, b in zip(rates, rates[1:]))
    with pytest.raises(ValueError):
        learning_rate(config, 0)


def test_config_problems():
    assert TrainConfig().problems() == []
    problems = TrainConfig(kappa0=0, inner_steps=0, target_error=1.5, weight_init='gaussian').problems()
    assert any(p.startswith('kappa0:') for p in problems)
    assert any(p.startswith('inner_steps:') for p in problems)
    assert any(p.startswith('target_error:') for p in problems)
    assert any(p.startswith('weight_init:') for p in problems)


def test_initial_weights():
    net = heisenberg_z_net()
    rng = make_rng(1)
    assert np.all(initial_weights(net, TrainConfig(weight_init='zeros'), rng) == 0)
    w = initial_weights(net, TrainConfig(init_scale=0.5), rng)
    assert w.shape == (3,) and np.all(np.abs(w) <= 0.5)
    np.testing.assert_array_equal(initial_weights(net, TrainConfig(weight_init=[1.0, 2.0, 3.0]), rng), [1, 2, 3])
    with pytest.raises(ValueError):
        initial_weights(net, TrainConfig(weight_init=[1.0]), rng)


def test_gradient_of_scalar_case():
    net = field_net(('X',))
    zero = np.array([1, 0], dtype=complex)
    pair = TrainingPair(zero, zero)
    for w in (np.pi / 4, 0.3, -1.1):
        fid, grad = pair_fidelity_and_gradient(net, [w], pair, np.eye(2), NO_ANCILLA)
        assert abs(fid - np.cos(w) ** 2) < 1e-12
        assert abs(grad[0] + np.sin(2 * w)) < 1e-12
        fd = finite_difference_gradient(net, [w], pair, np.eye(2), NO_ANCILLA, step=1e-5)
        assert abs(fd[0] + np.sin(2 * w)) < 1e-8
    grad = pair_fidelity_gradient(net, [np.pi / 4], pair, np.eye(2), NO_ANCILLA)
    assert abs(grad[0] + 1) < 1e-12


def test_finite_differences_truncate_at_second_order():
    net = field_net(('X',))
    zero = np.array([1, 0], dtype=complex)
    pair = TrainingPair(zero, zero)
    w = 0.3
    exact = -np.sin(2 * w)
    third = 4 * np.sin(2 * w)
    coarse = finite_difference_gradient(net, [w], pair, np.eye(2), NO_ANCILLA, step=1e-4)[0]
    fine = finite_difference_gradient(net, [w], pair, np.eye(2), NO_ANCILLA, step=1e-5)[0]
    assert abs((coarse - exact) - 1e-8 / 6 * third) < 1e-10
    assert abs(fine - exact) < abs(coarse - exact) / 10
    richardson = (100 * fine - coarse) / 99
    assert abs(richardson - exact) < 1e-9
    with pytest.raises(ValueError):
        finite_difference_gradient(net, [w], pair, np.eye(2), NO_ANCILLA, step=0)


def test_gradient_vanishes_at_planted_maximum():
    net = heisenberg_z_net()
    target, w_star = planted_target(net, seed=3)
    rng = make_rng(2)
    for _ in range(5):
        pair = generate_training_pair(target, 2, rng)
        fid, grad = pair_fidelity_and_gradient(net, w_star, pair, target, NO_ANCILLA)
        assert abs(fid - 1) < 1e-10
        assert np.linalg.norm(grad) < 1e-8


def test_gradient_matches_finite_differences():
    rng = make_rng(3)
    shapes = [(1, 0), (2, 0), (3, 0), (1, 1), (1, 2), (2, 1)]
    for i in range(102):
        net, anc, target, w, pair = random_instance(rng, *shapes[i % len(shapes)])
        analytic = pair_fidelity_gradient(net, w, pair, target, anc)
        numeric = finite_difference_gradient(net, w, pair, target, anc, step=1e-5)
        assert np.max(np.abs(analytic - numeric)) < 1e-6


def test_corrupted_generator_is_detected():
    rng = make_rng(4)
    net, anc, target, w, pair = random_instance(rng, 2, 1)
    corrupted = np.array(generator_stack(net))
    corrupted[0] = 2.0 * corrupted[0]
    analytic = pair_fidelity_gradient(net, w, pair, target, anc, generators=corrupted)
    numeric = finite_difference_gradient(net, w, pair, target, anc)
    assert abs(analytic[0] - numeric[0]) > 1e-6
    np.testing.assert_allclose(analytic[1:], numeric[1:], atol=1e-6)


def test_small_ascent_step_does_not_lose_fidelity():
    rng = make_rng(5)
    kappa = 1e-3
    for i in range(50):
        net, anc, target, w, pair = random_instance(rng, 1 + i % 2, i % 2)
        before, grad = pair_fidelity_and_gradient(net, w, pair, target, anc)
        after = pair_fidelity(net, w + kappa * grad, pair, target, anc)
        assert after >= before - 10 * kappa ** 2 * (1 + grad @ grad)


def test_identity_target_converges_immediately():
    net = heisenberg_z_net()
    result = sgd_train(net, np.eye(4), NO_ANCILLA, TrainConfig(weight_init='zeros'))
    assert result.converged
    assert result.error == pytest.approx(0.0, abs=1e-15)
    assert result.updates == 0 and result.steps_used == 0
    assert [p.step for p in result.learning_curve] == [0]


def test_inner_steps_per_sample():
    # a Z rotation never overlaps X, so the exact fidelity stays at 1/3
    net = field_net(('Z',))
    config = TrainConfig(inner_steps=3, max_outer_steps=7, seed=1)
    result = sgd_train(net, gate_by_name('X'), NO_ANCILLA, config)
    assert not result.converged
    assert result.steps_used == 7
    assert result.updates == 21
    assert [p.step for p in result.learning_curve] == [0, 7]
    assert result.exact_fidelity == pytest.approx(1 / 3, abs=1e-12)
    assert result.error == 1.0 - result.exact_fidelity


def test_checkpoint_cadence_and_monotone_best():
    net = heisenberg_z_net()
    target, _ = planted_target(net, seed=8)
    config = TrainConfig(max_outer_steps=120, checkpoint_every=50, target_error=1e-12, seed=3)
    result = sgd_train(net, target, NO_ANCILLA, config)
    curve = result.learning_curve
    assert [p.step for p in curve] == [0, 50, 100, 120]
    best = [p.best_fidelity for p in curve]
    assert all(b2 >= b1 for b1, b2 in zip(best, best[1:]))
    assert result.exact_fidelity == max(p.exact_fidelity for p in curve)
    assert curve[1].learning_rate == learning_rate(config, 50)


def test_box_bounds_are_enforced():
    net = heisenberg_z_net()
    target, _ = planted_target(net, seed=4, scale=2.0)
    config = TrainConfig(max_outer_steps=60, box_bounds=[-0.1, 0.1], seed=2)
    result = sgd_train(net, target, NO_ANCILLA, config)
    assert np.all(np.abs(result.weights) <= 0.1)
    with pytest.raises(ValueError):
        sgd_train(net, target, NO_ANCILLA, TrainConfig(box_bounds=[[0, 1]]))


def test_training_is_deterministic():
    net = heisenberg_z_net()
    target, _ = planted_target(net, seed=5)
    config = TrainConfig(max_outer_steps=200, target_error=1e-12, seed=99)
    first = sgd_train(net, target, NO_ANCILLA, config)
    second = sgd_train(net, target, NO_ANCILLA, config)
    assert np.array_equal(first.weights, second.weights)
    assert first.learning_curve == second.learning_curve
    assert first.to_dict() == second.to_dict()


def test_multi_restart_contract():
    net = heisenberg_z_net()
    target, _ = planted_target(net, seed=6)
    single = TrainConfig(max_outer_steps=100, target_error=1e-12, seed=7)
    alone = sgd_train(net, target, NO_ANCILLA, single)
    wrapped = multi_restart(net, target, NO_ANCILLA, single)
    assert wrapped.best.to_dict() == alone.to_dict()

    config = TrainConfig(max_outer_steps=100, target_error=1e-12, seed=7, restarts=4)
    finished = []
    sequential = multi_restart(net, target, NO_ANCILLA, config, on_finish=finished.append)
    assert finished == [0, 1, 2, 3]
    assert all(sequential.best.exact_fidelity >= r.exact_fidelity for r in sequential.restarts)

    pooled = multi_restart(net, target, NO_ANCILLA, TrainConfig(**{**config.to_dict(), 'workers': 2}))
    assert [r.to_dict() for r in pooled.restarts] == [r.to_dict() for r in sequential.restarts]
    assert pooled.best.restart_index == sequential.best.restart_index


def test_select_best_prefers_lowest_index_on_ties():
    net = field_net(('Z',))
    config = TrainConfig(max_outer_steps=3, seed=1)
    results = [sgd_train(net, gate_by_name('X'), NO_ANCILLA, config, restart_index=r) for r in (2, 0, 1)]
    assert select_best(results).restart_index == 0


def test_planted_two_qubit_heisenberg_is_recovered():
    net = heisenberg_z_net()
    target, _ = planted_target(net, seed=7)
    config = TrainConfig(max_outer_steps=20000, target_error=1e-3, restarts=20, seed=2024)
    outcome = multi_restart(net, target, NO_ANCILLA, config)
    assert outcome.best.converged
    assert outcome.best.error < 1e-3


def test_converged_solution_is_stationary():
    net = field_net(('X', 'Z'))
    target, _ = planted_target(net, seed=3)
    config = TrainConfig(max_outer_steps=20000, target_error=1e-9, restarts=5, seed=11)
    best = multi_restart(net, target, NO_ANCILLA, config).best
    assert best.converged
    step = 1e-5
    grad = np.zeros(net.num_weights)
    for k in range(net.num_weights):
        shift = np.zeros(net.num_weights)
        shift[k] = step
        grad[k] = (exact_average_fidelity(net, best.weights + shift, target, NO_ANCILLA)
                   - exact_average_fidelity(net, best.weights - shift, target, NO_ANCILLA)) / (2 * step)
    assert np.linalg.norm(grad) < 1e-3


def test_cz_from_ising_couplings_and_fields():
    net = cz_net()
    cz = gate_by_name('CZ')
    oracle = np.array([np.pi / 4, -np.pi / 4, -np.pi / 4])
    assert abs(exact_average_fidelity(net, oracle, cz, NO_ANCILLA) - 1) < 1e-12

    config = TrainConfig(max_outer_steps=20000, target_error=1e-3, restarts=10, seed=11)
    best = multi_restart(net, cz, NO_ANCILLA, config).best
    assert best.error < 1e-3
    j, h0, h1 = best.weights
    # diagonal phase equations of CZ up to a global phase
    assert abs(wrap(2 * j + 2 * h1)) < 0.25
    assert abs(wrap(2 * j + 2 * h0)) < 0.25
    assert abs(wrap(2 * h0 + 2 * h1 - np.pi)) < 0.25


@pytest.mark.slow
def test_toffoli_with_ancillas_machinery():
    net = QubitNetwork(5, (0, 1, 2), edges=tuple(complete_edges(5)),
                       field_sites=tuple(all_field_sites(5, ('X', 'Z'))),
                       model=CouplingModel('heisenberg', local_field_axes=('X', 'Z')))
    toffoli = gate_by_name('TOFFOLI')
    anc = AncillaPrep.from_label('00', 2)
    config = TrainConfig(max_outer_steps=2000, restarts=2, stop_on_success=False, seed=3)
    first = multi_restart(net, toffoli, anc, config)
    second = multi_restart(net, toffoli, anc, config)
    for result in first.restarts:
        best = [p.best_fidelity for p in result.learning_curve]
        assert all(b2 >= b1 for b1, b2 in zip(best, best[1:]))
    assert [r.to_dict() for r in first.restarts] == [r.to_dict() for r in second.restarts]
    print(f"📊 Toffoli best error after {config.max_outer_steps} steps: {first.best.error:.3e}")


def main():
    """Run the tests without pytest"""
    print("🚀 Trainer tests")
    tests = [(name, func) for name, func in globals().items() if name.startswith('test_') and callable(func)]
    passed = 0
    for name, func in tests:
        try:
            func()
            print(f"✅ {name}")
            passed += 1
        except Exception as e:
            print(f"❌ {name}: {e}")
    print(f"📊 Test Results: {passed}/{len(tests)} tests passed")
    return passed == len(tests)


if __name__ == "__main__":
    sys.exit(0 if main() else 1)
