import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import dense
from shorkit.errors import ParameterError, ResourceError
from shorkit.gateir import GATE_ARITY, Gate, GateCircuit, gate, imm_gates, shor_circuit
from shorkit.sim import (
    Distribution,
    SparseState,
    apply_gate,
    make_eigenstate,
    output_distribution,
    permute_basis,
    register_key,
    register_keys,
    register_value,
    run_circuit,
    sample,
    shor_distribution,
    tv_distance,
)


def test_x_on_zero():
    s = apply_gate(SparseState.basis(1, 0), gate("X", 0))
    assert s.as_dict() == {1: 1}


def test_hadamard():
    s = apply_gate(SparseState.basis(1, 0), gate("H", 0))
    d = s.as_dict()
    assert set(d) == {0, 1}
    assert all(abs(v - 1 / math.sqrt(2)) < 1e-12 for v in d.values())
    s = apply_gate(s, gate("H", 0))
    assert set(s.as_dict()) == {0} and abs(s.amplitude(0) - 1) < 1e-12


def test_run_empty_circuit():
    assert run_circuit(GateCircuit(3, ()), 5).as_dict() == {5: 1}


@st.composite
def random_gate_circuits(draw, max_width=6, max_size=30):
    width = draw(st.integers(4, max_width))
    gates = []
    for _ in range(draw(st.integers(0, max_size))):
        kind = draw(st.sampled_from(sorted(GATE_ARITY)))
        nq, na = GATE_ARITY[kind]
        if nq > width:
            continue
        qs = draw(st.permutations(range(width)))[:nq]
        angles = tuple(draw(st.floats(-7, 7, allow_nan=False)) for _ in range(na))
        gates.append(Gate(kind, tuple(qs), angles))
    return GateCircuit(width, tuple(gates))


@settings(max_examples=80, deadline=None)
@given(random_gate_circuits(), st.integers(0, 63))
def test_sparse_matches_dense(c, initial):
    initial %= 1 << c.num_qubits
    got = run_circuit(c, initial).to_dense()
    e = np.zeros(1 << c.num_qubits, dtype=complex)
    e[initial] = 1
    want = dense.run(c.gates, c.num_qubits, e)
    # pruning drops amplitudes below 1e-12 and renormalizes
    assert np.max(np.abs(got - want)) < 1e-9
    assert abs(np.linalg.norm(got) - 1) < 1e-9


@settings(max_examples=40, deadline=None)
@given(random_gate_circuits(max_width=5, max_size=10))
def test_norm_after_every_gate(c):
    s = SparseState.basis(c.num_qubits, 0)
    for g in c.gates:
        s = apply_gate(s, g)
        assert abs(s.norm() - 1) < 1e-9
        assert np.all(np.abs(s.amps) >= s.prune_threshold)


def test_output_distribution_examples():
    assert dict(output_distribution(SparseState.basis(2, 0), (0, 2))) == {0: 1.0}
    s = run_circuit(GateCircuit(2, (gate("H", 0), gate("H", 1))), 0)
    d = output_distribution(s, (0, 1))
    assert abs(d.prob(0) - 0.5) < 1e-12 and abs(d.prob(1) - 0.5) < 1e-12


def test_register_keys_roundtrip():
    vals = np.arange(32, dtype=np.uint64)
    keys = register_keys(vals, 3, 5, 11)
    assert [int(k) for k in keys] == [register_key(int(v), 3, 5, 11) for v in vals]
    assert np.array_equal(register_value(keys, 3, 5, 11), vals)
    with pytest.raises(ParameterError):
        register_key(32, 0, 5, 11)


def test_imm_on_basis_state():
    c = imm_gates(3, 7)
    s = run_circuit(c, register_key(2, 0, 3, c.num_qubits))
    assert s.as_dict() == {register_key(6, 0, 3, c.num_qubits): 1}


def test_permute_basis_rejects_quantum_gates():
    with pytest.raises(ParameterError):
        permute_basis(GateCircuit(1, (gate("H", 0),)), [0])


def test_shor_3_7_distribution():
    c, p = shor_circuit(3, 7)
    s = run_circuit(c, 0)
    assert len(s) <= (1 << 6) * 7
    d = output_distribution(s, (0, p.m))
    assert abs(d.prob(0) - 684 / 4096) < 1e-9
    assert abs(d.total() - 1) < 1e-9


def test_shor_7_15_support():
    d = shor_distribution(7, 15)
    assert d.support(1e-12) == {0, 64, 128, 192}
    for u in (0, 64, 128, 192):
        assert abs(d.prob(u) - 0.25) < 1e-9


def test_support_cap():
    c = GateCircuit(6, tuple(gate("H", q) for q in range(6)))
    with pytest.raises(ResourceError) as exc:
        run_circuit(c, 0, support_cap=16)
    assert exc.value.peak_support > 16


def test_width_limit():
    with pytest.raises(ResourceError):
        SparseState.basis(65, 0)


def test_sampling():
    assert sample(Distribution([0], [1.0]), 50, seed=1) == {0: 50}
    coin = Distribution([0, 1], [0.5, 0.5])
    counts = sample(coin, 100_000, seed=7)
    assert abs(counts[0] / 100_000 - 0.5) < 0.01
    assert sample(coin, 1000, seed=3) == sample(coin, 1000, seed=3)
    with pytest.raises(ParameterError):
        sample(coin, 0, seed=0)


def test_tv_distance():
    a = Distribution([0, 1], [0.5, 0.5])
    b = Distribution([1, 2], [0.5, 0.5])
    assert abs(tv_distance(a, b) - 0.5) < 1e-12
    assert tv_distance(a, a) == 0


def test_eigenstate_trivial():
    s = make_eigenstate(1, 1, 7, 0, 3)
    assert s.as_dict() == {register_key(1, 0, 3, 3): 1}


def test_sum_of_eigenstates_is_one():
    r, n = 6, 3
    total = np.zeros(1 << n, dtype=complex)
    for j in range(r):
        total += make_eigenstate(3, r, 7, j, n).to_dense()
    total /= math.sqrt(r)
    want = np.zeros(1 << n)
    want[register_key(1, 0, n, n)] = 1
    assert np.max(np.abs(total - want)) < 1e-9


def test_eigenpair_phase_3_7():
    c = imm_gates(3, 7)
    psi = make_eigenstate(3, 6, 7, 1, 3, num_qubits=c.num_qubits)
    out = psi.copy().run(c)
    assert abs(psi.inner(out) - np.exp(2j * math.pi / 6)) < 1e-9
