import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vqtsp.codec import CodecSpec, KINDS, int_to_bits
from vqtsp.config import MlConfig, OptimConfig
from vqtsp.cost import CostCache
from vqtsp.errors import ConfigError, LengthMismatchError
from vqtsp.ml import (
    MlModel,
    Optimizer,
    backward,
    backward_and_step,
    binarize,
    cost_gradient,
    forward,
    init_model,
    run_ml,
    surrogate_loss,
)
from vqtsp.tsp import brute_force_optimum, random_instance, tour_length


def test_binarize_examples():
    assert binarize(np.array([0.7]), np.array([0.4]))[0] == 1
    assert binarize(np.array([0.7]), np.array([0.9]))[0] == 0
    out = binarize(np.array([-1.0, 0.0, 1.0]), np.array([0.0, 0.0, 0.999]))
    assert out.tolist() == [0, 0, 1] and out.dtype == np.int8


def zero_model(q, layers=3, n_inputs=16):
    return MlModel([np.zeros((q, q)) for _ in range(layers)], [np.zeros(q) for _ in range(layers)], np.full(q, 0.5), n_inputs)


def test_zero_model_emits_identity_cycle():
    codec = CodecSpec("non_factorial", 6)
    model = zero_model(codec.length)
    bits, tape = forward(model, np.random.default_rng(0))
    assert np.all(tape.out == 0.0)
    assert not bits.any()
    assert codec.decode(bits[0]) == tuple(range(6))


def test_warm_start_zero_sigma():
    q, cfg = 5, MlConfig(warm_start=True, sigma=0.0, inputs=20_000)
    model = init_model(q, cfg, np.random.default_rng(0), "10110")
    assert all(np.array_equal(W, np.eye(q)) for W in model.weights)
    assert all(not b.any() for b in model.biases)
    bits, _ = forward(model, np.random.default_rng(1))
    # zero bits stay zero; one bits fire with probability sin applied L times to 1
    p = 1.0
    for _ in range(cfg.layers):
        p = math.sin(p)
    assert not bits[:, [1, 4]].any()
    freq = bits[:, [0, 2, 3]].mean(axis=0)
    assert np.allclose(freq, p, atol=0.02)


def test_warm_start_length_checked():
    with pytest.raises(LengthMismatchError):
        init_model(4, MlConfig(warm_start=True), np.random.default_rng(0), "101")


def test_cold_init_bounds_and_inputs():
    rng = np.random.default_rng(0)
    model = init_model(9, MlConfig(), rng)
    assert all(np.max(np.abs(W)) <= 1 / 3 for W in model.weights)
    assert model.layers == 4 and model.n_inputs == 64
    assert np.all(model.input_row == 0)
    assert np.all(init_model(9, MlConfig(input_mode="halves"), rng).input_row == 0.5)
    with pytest.raises(ConfigError):
        MlConfig(input_mode="ones")


def test_cost_gradient_square(square):
    cache = CostCache(square, CodecSpec("non_factorial", 4))
    h, g = cost_gradient([0, 0, 0], cache)
    assert h == 4.0
    for j in range(3):
        flipped = [0, 0, 0]
        flipped[j] = 1
        other = tour_length(square, cache.codec.decode(flipped))
        assert g[j] == pytest.approx(other - 4.0)
    assert cache.queries == 4


def test_cost_gradient_zero_when_flip_keeps_cycle():
    # rotations of one permutation decode to the same cycle under the factorial codec
    inst = random_instance(5, 0)
    codec = CodecSpec("factorial", 5)
    cache = CostCache(inst, codec)
    found = 0
    for v in range(1 << codec.length):
        row = np.array([int(c) for c in int_to_bits(v, codec.length)])
        _, g = cost_gradient(row, cache)
        for j in range(codec.length):
            if codec.decode_int(v ^ (1 << (codec.length - 1 - j))) == codec.decode_int(v):
                assert g[j] == 0.0
                found += 1
    assert found > 0


@given(st.integers(4, 7), st.sampled_from(KINDS), st.booleans(), st.integers(0, 2**32 - 1))
def test_cost_gradient_reproduces_flip_change(n, kind, gray, seed):
    inst = random_instance(n, seed % 997)
    codec = CodecSpec(kind, n, gray)
    rng = np.random.default_rng(seed)
    row = rng.integers(0, 2, codec.length)
    j = int(rng.integers(codec.length))
    h, g = cost_gradient(row, CostCache(inst, codec))
    flipped = row.copy()
    flipped[j] ^= 1
    h_flip = tour_length(inst, codec.decode(flipped))
    # moving bit j from its value to the other changes the cost by +-g_j
    expected = h_flip - h if row[j] == 0 else h - h_flip
    assert g[j] == pytest.approx(expected, abs=1e-9)
    assert h == pytest.approx(tour_length(inst, codec.decode(row)))


def test_cost_gradient_length_checked(square):
    with pytest.raises(LengthMismatchError):
        cost_gradient([0, 0], CostCache(square, CodecSpec("non_factorial", 4)))


def test_sine_layer_backward():
    rng = np.random.default_rng(3)
    q = 4
    model = MlModel([rng.normal(size=(q, q))], [rng.normal(size=q)], rng.normal(size=q), 1)
    u = rng.random((1, q))
    up = rng.normal(size=(1, q))
    _, tape = forward(model, u=u)
    dWs, dbs = backward(model, tape, up)
    # single layer: dL/db = cos(z) * upstream
    assert np.allclose(dbs[0], (np.cos(tape.pre[0]) * up)[0], rtol=1e-12)
    eps = 1e-6
    for i in range(q):
        model.biases[0][i] += eps
        lp = surrogate_loss(model, up, u)
        model.biases[0][i] -= 2 * eps
        lm = surrogate_loss(model, up, u)
        model.biases[0][i] += eps
        fd = (lp - lm) / (2 * eps)
        assert fd == pytest.approx(dbs[0][i], rel=1e-6, abs=1e-10)


def test_full_gradient_matches_finite_differences():
    rng = np.random.default_rng(11)
    q, cfg = 3, MlConfig(layers=3, inputs=5, input_mode="halves")
    model = init_model(q, cfg, rng)
    u = rng.random((cfg.inputs, q))
    up = rng.normal(size=(cfg.inputs, q))
    _, tape = forward(model, u=u)
    dWs, dbs = backward(model, tape, up)
    analytic = np.concatenate([g.ravel() for g in dWs + dbs])
    fd = []
    eps = 1e-6
    for p in model.params():
        flat = p.reshape(-1)
        for i in range(flat.size):
            flat[i] += eps
            lp = surrogate_loss(model, up, u)
            flat[i] -= 2 * eps
            lm = surrogate_loss(model, up, u)
            flat[i] += eps
            fd.append((lp - lm) / (2 * eps))
    fd = np.array(fd)
    assert np.linalg.norm(analytic - fd) / np.linalg.norm(fd) <= 1e-4


def test_straight_through_is_identity():
    # the bits never enter the backward pass: same upstream, different bits, same gradients
    rng = np.random.default_rng(2)
    model = init_model(4, MlConfig(inputs=8), rng)
    up = rng.normal(size=(8, 4))
    _, t1 = forward(model, u=np.zeros((8, 4)))
    _, t2 = forward(model, u=np.full((8, 4), 0.999))
    g1, g2 = backward(model, t1, up), backward(model, t2, up)
    assert not np.array_equal(t1.bits, t2.bits)
    assert all(np.array_equal(a, b) for a, b in zip(g1[0] + g1[1], g2[0] + g2[1]))


@pytest.mark.parametrize("kind", ["sgd", "adam"])
def test_zero_gradient_no_decay_leaves_weights(kind):
    rng = np.random.default_rng(0)
    model = init_model(4, MlConfig(), rng)
    before = [p.copy() for p in model.params()]
    opt = Optimizer(OptimConfig.defaults(kind, weight_decay=0.0))
    _, tape = forward(model, rng)
    for _ in range(5):
        backward_and_step(model, tape, np.zeros((64, 4)), opt)
    assert all(np.array_equal(a, b) for a, b in zip(before, model.params()))


def test_decay_shrinks_weights_sgd():
    rng = np.random.default_rng(0)
    model = init_model(4, MlConfig(), rng)
    opt = Optimizer(OptimConfig.defaults("sgd", eta=0.1, weight_decay=0.5))
    _, tape = forward(model, rng)
    norms = [sum(np.abs(p).sum() for p in model.params())]
    for _ in range(5):
        backward_and_step(model, tape, np.zeros((64, 4)), opt)
        norms.append(sum(np.abs(p).sum() for p in model.params()))
    assert all(b < a for a, b in zip(norms, norms[1:]))


def test_sgd_momentum_update_rule():
    p = np.array([1.0])
    opt = Optimizer(OptimConfig(kind="sgd", eta=0.1, momentum=0.5, weight_decay=0.0))
    opt.step([p], [np.array([2.0])])
    assert p[0] == pytest.approx(0.8)
    opt.step([p], [np.array([2.0])])
    assert p[0] == pytest.approx(0.8 - 0.1 * 3.0)


def test_adam_first_step_is_eta_sign():
    p = np.array([1.0, 1.0])
    opt = Optimizer(OptimConfig.defaults("adam", weight_decay=0.0))
    opt.step([p], [np.array([3.0, -0.2])])
    assert np.allclose(p, [1 - 0.001, 1 + 0.001], atol=1e-8)


def small(**kw):
    base = dict(epochs=5, inputs=16)
    base.update(kw)
    return MlConfig(**base)


def test_run_ml_reproducible(inst8):
    a, b = run_ml(inst8, small(), seed=9), run_ml(inst8, small(), seed=9)
    assert a.to_json(timing=False) == b.to_json(timing=False)
    assert a.model == "ml"


def test_run_ml_zero_epochs(inst8):
    rec = run_ml(inst8, small(epochs=0), seed=1)
    assert len(rec.trace) == 1 and rec.evaluations == 1
    assert rec.best_distance == rec.trace[0][2]
    assert tour_length(inst8, rec.best_cycle) == pytest.approx(rec.best_distance)


def test_run_ml_bitstrings_scale_with_inputs(inst8):
    q = CodecSpec("non_factorial", 8).length
    r1 = run_ml(inst8, small(inputs=16), seed=0)
    r2 = run_ml(inst8, small(inputs=32), seed=0)
    assert r1.bitstrings == 6 * 16 * (q + 1)
    assert r2.bitstrings == 2 * r1.bitstrings


def test_run_ml_best_is_monotone(inst8):
    rec = run_ml(inst8, small(epochs=20), seed=2)
    best = [b for _, _, b in rec.trace]
    assert all(x >= y for x, y in zip(best, best[1:]))
    assert rec.best_distance >= brute_force_optimum(inst8)[1] - 1e-9


def test_warm_start_feeds_greedy_bits(inst8):
    from vqtsp.tsp import greedy_nearest_neighbour

    codec = CodecSpec("non_factorial", 8)
    bits = codec.encode(greedy_nearest_neighbour(inst8)[0])
    model = init_model(codec.length, small(warm_start=True), np.random.default_rng(0), bits)
    assert "".join(str(int(x)) for x in model.input_row) == bits
    rec = run_ml(inst8, small(warm_start=True), seed=0)
    assert rec.config["warm_start"] is True


@pytest.mark.slow
def test_n6_defaults_quality():
    # the default SGD step of 2e-5 leaves bits with negative activation stuck at 0
    good = 0
    for seed in range(5):
        inst = random_instance(6, 100 + seed)
        rec = run_ml(inst, MlConfig(), seed=seed)
        good += brute_force_optimum(inst)[1] / rec.best_distance >= 0.99
    assert good >= 4
