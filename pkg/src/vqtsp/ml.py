"""Classical stand-in for the circuit: sine-activated dense layers with stochastic binarisation.

Training uses a bit-flip estimate of the cost gradient and a straight-through
pass over the binarisation, then plain numpy backpropagation.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .codec import CodecSpec, int_to_bits
from .config import MlConfig, OptimConfig
from .cost import CostCache, coverage, slice_count
from .errors import LengthMismatchError
from .qsim import rows_to_values
from .records import RunRecord
from .tsp import TspInstance, greedy_nearest_neighbour

log = logging.getLogger(__name__)

__all__ = [
    "MlModel",
    "Optimizer",
    "Tape",
    "backward",
    "backward_and_step",
    "binarize",
    "cost_gradient",
    "forward",
    "init_model",
    "run_ml",
    "surrogate_loss",
]


@dataclass
class MlModel:
    weights: list  # L arrays, (q, q); layer output is x @ W.T + b
    biases: list  # L arrays, (q,)
    input_row: np.ndarray  # (q,) fed to every one of the N_s rows
    n_inputs: int

    @property
    def q(self) -> int:
        return self.input_row.size

    @property
    def layers(self) -> int:
        return len(self.weights)

    def params(self) -> list:
        return self.weights + self.biases


def init_model(q: int, cfg: MlConfig, rng: np.random.Generator, warm_bits=None) -> MlModel:
    """Build a model.

    Cold models draw weights and biases from U(-1/sqrt(q), 1/sqrt(q)).  Warm
    models start every layer at the identity, perturbed by N(0, sigma^2)
    noise on the weights, with zero biases, and feed ``warm_bits`` as input.
    """
    if warm_bits is not None:
        x = np.array([int(c) for c in warm_bits], dtype=float)
        if x.size != q:
            raise LengthMismatchError(f"warm-start bit string has {x.size} bits, model needs {q}")
        weights = [np.eye(q) + cfg.sigma * rng.standard_normal((q, q)) for _ in range(cfg.layers)]
        biases = [np.zeros(q) for _ in range(cfg.layers)]
    else:
        bound = 1.0 / math.sqrt(q)
        weights, biases = [], []
        for _ in range(cfg.layers):
            weights.append(rng.uniform(-bound, bound, (q, q)))
            biases.append(rng.uniform(-bound, bound, q))
        x = np.full(q, 0.5 if cfg.input_mode == "halves" else 0.0)
    return MlModel(weights, biases, x, cfg.inputs)


def binarize(a: np.ndarray, u: np.ndarray) -> np.ndarray:
    """1 where the activation exceeds the uniform draw, else 0."""
    return (a > u).astype(np.int8)


@dataclass
class Tape:
    """Values kept from the forward pass for the backward pass."""

    inputs: list  # layer inputs, L entries
    pre: list  # pre-activations z = x W^T + b, L entries
    out: np.ndarray  # final sine activations a, (N, q)
    u: np.ndarray  # binarisation noise, (N, q)
    bits: np.ndarray  # (N, q) in {0, 1}


def forward(model: MlModel, rng: Optional[np.random.Generator] = None, u: Optional[np.ndarray] = None):
    """One pass over ``N_s`` copies of the input row; returns ``(bits, tape)``."""
    x = np.tile(model.input_row, (model.n_inputs, 1))
    inputs, pre = [], []
    for W, b in zip(model.weights, model.biases):
        inputs.append(x)
        z = x @ W.T + b
        pre.append(z)
        x = np.sin(z)
    if u is None:
        u = rng.random(x.shape)
    bits = binarize(x, u)
    return bits, Tape(inputs, pre, x, u, bits)


def cost_gradient(row, cache: CostCache):
    """Cost of a bit row and its bit-flip gradient.

    Component j is ``(h(x) - h(x ^ e_j)) / (2 x_j - 1)``: the change in cost
    when bit j moves from 0 to 1.  Every lookup goes through ``cache``.
    """
    row = np.asarray(row).astype(np.int64)
    q = row.size
    if q != cache.codec.length:
        raise LengthMismatchError(f"row has {q} bits, codec needs {cache.codec.length}")
    value = int("".join("1" if b else "0" for b in row.tolist()), 2)
    h = cache.lookup(value)
    grad = np.empty(q)
    for j in range(q):
        hf = cache.lookup(value ^ (1 << (q - 1 - j)))
        grad[j] = (h - hf) if row[j] else (hf - h)
    return h, grad


def backward(model: MlModel, tape: Tape, upstream: np.ndarray):
    """Gradients of ``sum(upstream * a)`` with the binarisation treated as identity."""
    da = np.asarray(upstream, dtype=float)
    dWs, dbs = [None] * model.layers, [None] * model.layers
    for k in reversed(range(model.layers)):
        dz = da * np.cos(tape.pre[k])
        dWs[k] = dz.T @ tape.inputs[k]
        dbs[k] = dz.sum(axis=0)
        da = dz @ model.weights[k]
    return dWs, dbs


def surrogate_loss(model: MlModel, upstream: np.ndarray, u: np.ndarray) -> float:
    """``sum(upstream * a)`` at fixed noise; its exact gradient is what :func:`backward` returns."""
    _, tape = forward(model, u=u)
    return float(np.sum(upstream * tape.out))


class Optimizer:
    """SGD with momentum or Adam, both with L2 weight decay added to the gradient."""

    def __init__(self, cfg: OptimConfig):
        self.cfg = cfg
        self.t = 0
        self.m = None
        self.v = None

    def step(self, params: list, grads: list) -> None:
        cfg = self.cfg
        if self.m is None:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]
        self.t += 1
        for i, (p, g) in enumerate(zip(params, grads)):
            g = g + cfg.weight_decay * p
            if cfg.kind == "sgd":
                if cfg.momentum:
                    self.m[i] = g if self.t == 1 else cfg.momentum * self.m[i] + g
                    g = self.m[i]
                p -= cfg.eta * g
            else:
                self.m[i] = cfg.momentum * self.m[i] + (1 - cfg.momentum) * g
                self.v[i] = cfg.beta2 * self.v[i] + (1 - cfg.beta2) * g * g
                m_hat = self.m[i] / (1 - cfg.momentum**self.t)
                v_hat = self.v[i] / (1 - cfg.beta2**self.t)
                p -= cfg.eta * m_hat / (np.sqrt(v_hat) + cfg.eps)


def backward_and_step(model: MlModel, tape: Tape, cost_grads: np.ndarray, opt: Optimizer) -> None:
    """Backpropagate per-entry cost gradients and update the model in place."""
    dWs, dbs = backward(model, tape, cost_grads)
    opt.step(model.params(), dWs + dbs)


def run_ml(inst: TspInstance, cfg: MlConfig = MlConfig(), seed: Optional[int] = 0) -> RunRecord:
    """Train the model for ``cfg.epochs`` epochs, tracking the best decoded tour."""
    codec = CodecSpec(cfg.codec, inst.n, cfg.gray, cfg.gray_scope)
    q = codec.length
    rng = np.random.default_rng(seed)
    warm = codec.encode(greedy_nearest_neighbour(inst)[0]) if cfg.warm_start else None
    model = init_model(q, cfg, rng, warm)
    opt = Optimizer(cfg.optim)
    cache = CostCache(inst, codec, enabled=cfg.cache)

    best, best_value = math.inf, None
    trace = []
    start = time.perf_counter()
    for t in range(cfg.epochs + 1):
        bits, tape = forward(model, rng)
        rows = [cost_gradient(r, cache) for r in bits]
        h = np.array([r[0] for r in rows])
        G = np.array([r[1] for r in rows])
        i = int(np.argmin(h))
        if h[i] < best:
            best = float(h[i])
            best_value = int(rows_to_values(bits[i : i + 1])[0])
        # the slice keeps the lowest-cost rows; only they carry gradient
        k = slice_count(h.size, cfg.slice)
        keep = np.argsort(h, kind="stable")[:k]
        avg = math.fsum(h[keep]) / k
        trace.append((t, avg, best))
        log.debug("epoch=%d avg=%.6g best=%.6g", t, avg, best)
        if t == cfg.epochs:
            break
        upstream = np.zeros_like(G)
        upstream[keep] = G[keep] / k
        backward_and_step(model, tape, upstream, opt)
    seconds = time.perf_counter() - start

    return RunRecord(
        model="ml",
        instance=inst.name,
        n=inst.n,
        seed=seed,
        config=asdict(cfg),
        trace=trace,
        best_cycle=codec.decode_int(best_value),
        best_distance=best,
        best_bits=int_to_bits(best_value, q),
        hits=cache.hits,
        misses=cache.misses,
        coverage=coverage(cache, inst.n).coverage,
        evaluations=cfg.epochs + 1,
        seconds=seconds,
    )
