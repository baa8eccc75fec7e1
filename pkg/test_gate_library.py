#!/usr/bin/env python3
"""
Tests for gate_library
"""

import sys

import numpy as np
import pytest

from gate_library import GATE_ARITY, NamedGate, build_gate, gate_by_name, qft_matrix


def basis(index, dim):
    v = np.zeros(dim, dtype=complex)
    v[index] = 1
    return v


def test_every_gate_is_unitary():
    for name, arity in GATE_ARITY.items():
        for n in ([arity] if arity else [1, 2, 3, 4]):
            u = gate_by_name(name, n)
            assert u.shape == (2 ** n, 2 ** n)
            assert np.linalg.norm(u.conj().T @ u - np.eye(2 ** n)) < 1e-12


def test_involutions():
    for name in ('X', 'Y', 'Z', 'H', 'CNOT', 'CZ', 'SWAP', 'TOFFOLI', 'FREDKIN'):
        u = gate_by_name(name)
        assert np.linalg.norm(u @ u - np.eye(u.shape[0])) < 1e-12


def test_qft_one_qubit_is_hadamard():
    np.testing.assert_allclose(qft_matrix(1), gate_by_name('H'), atol=1e-15)


def test_qft_maps_zero_to_uniform_superposition():
    for n in (1, 2, 3, 5):
        u = gate_by_name('QFT', n)
        assert np.all(u @ basis(0, 2 ** n) == 1 / np.sqrt(2 ** n))
        assert np.linalg.norm(u @ u.conj().T - np.eye(2 ** n)) < 1e-12


def test_qft_entries():
    u = gate_by_name('QFT2')
    omega = 1j
    for j in range(4):
        for k in range(4):
            assert abs(u[j, k] - omega ** (j * k) / 2) < 1e-14


def test_toffoli_and_fredkin_conventions():
    toffoli = gate_by_name('TOFFOLI')
    for i in range(8):
        expected = {6: 7, 7: 6}.get(i, i)
        np.testing.assert_array_equal(toffoli @ basis(i, 8), basis(expected, 8))
    fredkin = gate_by_name('fredkin')
    np.testing.assert_array_equal(fredkin @ basis(5, 8), basis(6, 8))
    np.testing.assert_array_equal(fredkin @ basis(3, 8), basis(3, 8))


def test_two_qubit_conventions():
    np.testing.assert_array_equal(gate_by_name('CNOT') @ basis(2, 4), basis(3, 4))
    np.testing.assert_array_equal(gate_by_name('CNOT') @ basis(1, 4), basis(1, 4))
    np.testing.assert_array_equal(gate_by_name('SWAP') @ basis(1, 4), basis(2, 4))
    np.testing.assert_array_equal(gate_by_name('CZ') @ basis(3, 4), -basis(3, 4))
    np.testing.assert_array_equal(gate_by_name('ISWAP') @ basis(1, 4), 1j * basis(2, 4))


def test_parse_names():
    assert NamedGate.parse('qft3') == NamedGate('QFT', 3)
    assert NamedGate.parse('QFT', 2) == NamedGate('QFT', 2)
    assert NamedGate.parse('I2') == NamedGate('I', 2)
    assert NamedGate.parse('iswap') == NamedGate('ISWAP', 2)
    assert NamedGate.parse('cnot') == NamedGate('CNOT', 2)


def test_arity_errors():
    with pytest.raises(ValueError, match='acts on 3 qubits'):
        build_gate(NamedGate('TOFFOLI', 2))
    with pytest.raises(ValueError):
        NamedGate.parse('QFT')
    with pytest.raises(ValueError):
        NamedGate.parse('QFT3', 2)
    with pytest.raises(ValueError, match='Unknown gate'):
        NamedGate.parse('BOGUS')


def main():
    """Run the tests without pytest"""
    print("🚀 Gate library tests")
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
