import math
from functools import reduce

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from vqtsp.errors import ConfigError, LengthMismatchError, ResourceLimitError
from vqtsp.qsim import (
    DENSE_MAX_QUBITS,
    GateOp,
    build_circuit,
    load_warm_start,
    parse_netlist,
    sample,
    simulate,
)
from vqtsp.qsim import gates as G

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)
H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
P0, P1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])


def embed(ops, q):
    """Kronecker product with ``ops[i]`` on qubit i (qubit 0 most significant)."""
    return reduce(np.kron, [ops.get(i, I2) for i in range(q)])


def oracle_unitary(spec, theta):
    """Full 2^q x 2^q unitary built from matrix exponentials of Pauli strings."""
    q = spec.q
    U = np.eye(1 << q, dtype=complex)
    for g in spec.gates:
        t = spec.angle(g, theta)
        if g.kind == "H":
            M = embed({g.targets[0]: H}, q)
        elif g.kind in ("RX", "RY", "RZ"):
            P = {"RX": X, "RY": Y, "RZ": Z}[g.kind]
            M = expm(-0.5j * t * embed({g.targets[0]: P}, q))
        elif g.kind == "CX":
            a, b = g.targets
            M = embed({a: P0}, q) + embed({a: P1, b: X}, q)
        else:
            P = X if g.kind == "RXX" else Z
            a, b = g.targets
            M = expm(-0.5j * t * embed({a: P, b: P}, q))
        U = M @ U
    return U


def random_theta(spec, seed):
    return np.random.default_rng(seed).uniform(-2 * np.pi, 2 * np.pi, spec.param_count)


def test_circuit_shapes():
    c4 = build_circuit(4, 3)
    assert len(c4.gates) == 3 and c4.param_count == 3
    c2 = build_circuit(2, 3)
    assert [g.kind for g in c2.gates] == ["RX"] * 3 + ["RXX"] * 2
    assert c2.param_count == 5
    assert build_circuit(1, 29).param_count == 58
    assert build_circuit(5, 7).param_count == 14
    assert build_circuit(3, 5).param_count == 9
    assert build_circuit(3, 5, rzz_params=False).param_count == 5
    assert not build_circuit(4, 5).entangling and not build_circuit(5, 5).entangling
    assert all(build_circuit(i, 3).entangling for i in (1, 2, 3))


def test_circuit_errors():
    with pytest.raises(ConfigError):
        build_circuit(6, 3)
    with pytest.raises(ConfigError):
        GateOp("RXX", (1, 1), 0)
    with pytest.raises(ConfigError):
        GateOp("RX", (0,))
    with pytest.raises(LengthMismatchError):
        simulate(build_circuit(2, 3), [0.0] * 4)


@pytest.mark.parametrize("cid", [1, 2, 3, 4, 5])
def test_netlist_round_trip(cid):
    spec = build_circuit(cid, 4, rzz_params=False)
    back = parse_netlist(spec.netlist(), cid)
    assert back == spec


def test_netlist_line_format():
    lines = build_circuit(2, 2).netlist().splitlines()
    assert lines == ["RX 0 [0]", "RX 1 [1]", "RXX 0 1 [2]"]


@pytest.mark.parametrize("kind", ["RX", "RY", "RZ", "RXX", "RZZ", "H", "CX"])
def test_gates_are_unitary(kind):
    for t in np.linspace(-7, 7, 9):
        U = G.matrix(kind, t)
        assert np.allclose(U.conj().T @ U, np.eye(U.shape[0]), atol=1e-12)


@pytest.mark.parametrize("kind,pauli", [("RX", X), ("RY", Y), ("RZ", Z)])
def test_rotation_conventions(kind, pauli):
    assert np.allclose(G.matrix(kind, 0.7), expm(-0.35j * pauli), atol=1e-14)


def test_two_qubit_conventions():
    assert np.allclose(G.rxx(0.9), expm(-0.45j * np.kron(X, X)), atol=1e-14)
    assert np.allclose(G.rzz(0.9), expm(-0.45j * np.kron(Z, Z)), atol=1e-14)


def test_simulate_examples():
    c = build_circuit(4, 1)
    assert np.allclose(simulate(c, [0.0]).statevector(), [1, 0])
    psi = simulate(c, [np.pi]).statevector()
    assert np.allclose(psi, [0, -1j], atol=1e-15)
    assert simulate(c, [np.pi]).probabilities()[1] == pytest.approx(1.0)


def test_circuit2_against_matrix_oracle():
    spec = build_circuit(2, 2)
    theta = np.full(3, np.pi / 2)
    expected = np.abs(oracle_unitary(spec, theta)[:, 0]) ** 2
    for backend in ("dense", "mps"):
        assert np.allclose(simulate(spec, theta, backend).probabilities(), expected, atol=1e-12)


@pytest.mark.parametrize("cid", [1, 2, 3, 4, 5])
@pytest.mark.parametrize("q", [1, 2, 3, 5])
def test_backends_match_oracle(cid, q):
    spec = build_circuit(cid, q)
    theta = random_theta(spec, 10 * cid + q)
    expected = oracle_unitary(spec, theta)[:, 0]
    backends = ["dense", "mps"] + ([] if spec.entangling else ["product"])
    for b in backends:
        psi = simulate(spec, theta, b).statevector()
        # compare up to global phase
        phase = np.vdot(psi, expected)
        assert abs(abs(phase) - 1) < 1e-10
        assert np.allclose(psi * phase, expected, atol=1e-10)


@given(st.sampled_from([1, 2, 3, 4, 5]), st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_norm_preserved(cid, q, seed):
    spec = build_circuit(cid, q)
    psi = simulate(spec, random_theta(spec, seed), "dense").statevector()
    assert np.linalg.norm(psi) ** 2 == pytest.approx(1.0, abs=1e-10)


@given(st.sampled_from([4, 5]), st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_product_path_matches_dense(cid, q, seed):
    spec = build_circuit(cid, q)
    theta = random_theta(spec, seed)
    p_dense = simulate(spec, theta, "dense").probabilities()
    p_prod = simulate(spec, theta, "product").probabilities()
    assert np.max(np.abs(p_dense - p_prod)) <= 1e-12


@given(st.sampled_from([1, 2, 3]), st.integers(2, 12), st.integers(0, 2**32 - 1))
def test_chain_path_matches_dense(cid, q, seed):
    spec = build_circuit(cid, q)
    theta = random_theta(spec, seed)
    p_dense = simulate(spec, theta, "dense").probabilities()
    p_chain = simulate(spec, theta, "mps").probabilities()
    assert np.max(np.abs(p_dense - p_chain)) <= 1e-12


@given(st.sampled_from([1, 2, 3, 4, 5]), st.integers(1, 6), st.integers(0, 2**32 - 1), st.data())
def test_periodicity_4pi(cid, q, seed, data):
    spec = build_circuit(cid, q)
    theta = random_theta(spec, seed)
    shifted = theta.copy()
    if spec.param_count:
        shifted[data.draw(st.integers(0, spec.param_count - 1))] += 4 * np.pi
    p1 = simulate(spec, theta, "dense").probabilities()
    p2 = simulate(spec, shifted, "dense").probabilities()
    assert np.max(np.abs(p1 - p2)) <= 1e-10


def test_sampling_examples():
    c = build_circuit(4, 1)
    assert sample(c, [np.pi], 1024, 0).as_dict() == {"1": 1024}
    batch = sample(c, [np.pi / 2], 10**6, 1)
    assert 0.497 <= batch.as_dict()["1"] / 10**6 <= 0.503
    a, b = sample(build_circuit(2, 6), np.arange(11) * 0.3, 500, 42), sample(build_circuit(2, 6), np.arange(11) * 0.3, 500, 42)
    assert np.array_equal(a.values, b.values) and np.array_equal(a.counts, b.counts)
    assert a.shots == 500


@pytest.mark.parametrize("backend", ["dense", "mps"])
@pytest.mark.parametrize("cid,q", [(1, 3), (2, 4), (3, 4), (5, 2)])
def test_sampling_total_variation(cid, q, backend):
    spec = build_circuit(cid, q)
    theta = random_theta(spec, cid)
    p = simulate(spec, theta, "dense").probabilities()
    shots = 10**5
    tvs = []
    for seed in range(10):
        batch = sample(spec, theta, shots, seed, backend=backend)
        freq = np.zeros(1 << q)
        freq[batch.values] = batch.counts / shots
        tvs.append(0.5 * np.abs(freq - p).sum())
    assert np.mean(tvs) <= 5 / math.sqrt(shots)


def test_sampled_bit_order_matches_probabilities():
    # only qubit 0 flipped: outcome "100" must dominate
    spec = build_circuit(4, 3)
    batch = sample(spec, [np.pi, 0, 0], 100, 0)
    assert batch.as_dict() == {"100": 100}


def test_warm_start():
    spec = build_circuit(2, 3)
    assert np.array_equal(load_warm_start(spec, "000"), np.zeros(5))
    theta = load_warm_start(spec, "101")
    assert np.allclose(theta, [np.pi, 0, np.pi, 0, 0])
    assert sample(spec, theta, 256, 0).as_dict() == {"101": 256}
    with pytest.raises(ConfigError):
        load_warm_start(build_circuit(1, 3), "101")


@given(st.integers(2, 20), st.data())
def test_warm_start_emits_bits_with_certainty(q, data):
    bits = "".join(data.draw(st.sampled_from("01")) for _ in range(q))
    spec = build_circuit(2, q)
    assert sample(spec, load_warm_start(spec, bits), 64, 0, backend="mps").as_dict() == {bits: 64}


def test_resource_guards():
    big = build_circuit(2, DENSE_MAX_QUBITS + 4)
    with pytest.raises(ResourceLimitError, match=str(DENSE_MAX_QUBITS)):
        simulate(big, np.zeros(big.param_count), "dense")
    with pytest.raises(ResourceLimitError, match="dense-path limit"):
        sample(big, np.zeros(big.param_count), 10, 0)
    # entanglement-free circuits are unlimited on the product path
    c5 = build_circuit(5, 29)
    batch = sample(c5, np.full(58, 0.3), 100, 0)
    assert batch.q == 29 and batch.shots == 100
    # the chain simulator handles the entangling case on request
    assert sample(big, np.zeros(big.param_count), 10, 0, backend="mps").as_dict() == {"0" * big.q: 10}


def test_chain_bond_dimension_stays_small():
    spec = build_circuit(2, 12)
    state = simulate(spec, random_theta(spec, 3), "mps")
    assert max(state.bond_dims) <= 2


def test_unknown_backend():
    with pytest.raises(ConfigError):
        simulate(build_circuit(4, 2), [0, 0], "gpu")
