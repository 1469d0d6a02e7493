"""Variational feedback loop with SPSA and parameter-shift gradients."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict
from typing import Callable, Optional

import numpy as np

from .codec import CodecSpec, int_to_bits
from .config import ParamShiftConfig, SpsaConfig, VqaConfig
from .cost import CostCache, coverage, sliced_mean
from .errors import ConfigError, DomainError, LengthMismatchError
from .qsim import build_circuit, initial_parameters, load_warm_start, sample
from .records import RunRecord
from .tsp import TspInstance, greedy_nearest_neighbour

log = logging.getLogger(__name__)

__all__ = [
    "CountingCost",
    "SampledCost",
    "estimate_runtime",
    "param_shift_gradient",
    "param_shift_optimize",
    "run_vqa",
    "spsa_gradient",
    "spsa_optimize",
    "spsa_schedules",
]


def spsa_schedules(cfg: SpsaConfig, t: int, G0: float):
    """Step size ``a_t`` and perturbation size ``c_t`` for iteration ``t``."""
    if t < 0:
        raise DomainError(f"iteration index must be >= 0, got {t}")
    if not G0 > 0:
        log.warning("G0=%r is not positive; using g0_floor=%g", G0, cfg.g0_floor)
        G0 = cfg.g0_floor
    a = cfg.eta * (cfg.A + 1) ** cfg.alpha / G0
    return a / (t + 1 + cfg.A) ** cfg.alpha, cfg.c / (t + 1) ** cfg.gamma


class CountingCost:
    """Wraps a cost function and counts its evaluations."""

    def __init__(self, fn: Callable):
        self.fn = fn
        self.calls = 0

    def __call__(self, theta):
        self.calls += 1
        return self.fn(theta)


def spsa_gradient(costfn, theta, c_t: float, rng: np.random.Generator):
    """Two-evaluation SPSA estimate along a random +-1 perturbation."""
    theta = np.asarray(theta, dtype=float)
    delta = rng.integers(0, 2, size=theta.shape) * 2.0 - 1.0
    y_plus = costfn(theta + c_t * delta)
    y_minus = costfn(theta - c_t * delta)
    return (y_plus - y_minus) / (2.0 * c_t * delta)


def param_shift_gradient(costfn, theta, s: float = 0.5):
    """Shift-rule gradient, 2 evaluations per parameter."""
    if s <= 0:
        raise DomainError(f"shift scale must be positive, got {s}")
    theta = np.asarray(theta, dtype=float)
    shift = math.pi / (4 * s)
    grad = np.empty_like(theta)
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e.flat[i] = shift
        grad.flat[i] = s * (costfn(theta + e) - costfn(theta - e))
    return grad


def spsa_optimize(costfn, theta0, cfg: SpsaConfig, rng: np.random.Generator, track: Optional[Callable] = None):
    """Run ``cfg.iterations`` SPSA steps from ``theta0``.

    ``track(t, theta)`` is called before every step and once after the last.
    The first gradient estimate also supplies G0.  Returns the final angles.
    """
    theta = np.array(theta0, dtype=float)
    G0 = None
    for t in range(cfg.iterations):
        if track is not None:
            track(t, theta)
        c_t = cfg.c / (t + 1) ** cfg.gamma
        grad = spsa_gradient(costfn, theta, c_t, rng)
        if G0 is None:
            G0 = float(np.mean(np.abs(grad)))
            if not G0 > 0:
                log.info("first gradient estimate is zero; using g0_floor=%g", cfg.g0_floor)
                G0 = cfg.g0_floor
        a_t, _ = spsa_schedules(cfg, t, G0)
        theta = theta - a_t * grad
    if track is not None:
        track(cfg.iterations, theta)
    return theta


def param_shift_optimize(costfn, theta0, cfg: ParamShiftConfig, track: Optional[Callable] = None):
    """Plain gradient descent with shift-rule gradients."""
    theta = np.array(theta0, dtype=float)
    for t in range(cfg.iterations):
        if track is not None:
            track(t, theta)
        theta = theta - cfg.eta * param_shift_gradient(costfn, theta, cfg.s)
    if track is not None:
        track(cfg.iterations, theta)
    return theta


class SampledCost:
    """Sliced-average cost from fresh circuit samples; remembers the best shot seen."""

    def __init__(self, circuit, cache: CostCache, fraction: float, shots: int, rng, backend: str = "auto"):
        self.circuit = circuit
        self.cache = cache
        self.fraction = fraction
        self.shots = shots
        self.rng = rng
        self.backend = backend
        self.calls = 0
        self.sampled = 0
        self.best = math.inf
        self.best_value = None

    def __call__(self, theta) -> float:
        batch = sample(self.circuit, theta, self.shots, self.rng, backend=self.backend)
        distances = self.cache.evaluate_batch(batch)
        self.calls += 1
        self.sampled += batch.shots
        i = int(np.argmin(distances))
        if distances[i] < self.best:
            self.best = float(distances[i])
            self.best_value = int(batch.per_shot()[i])
        return sliced_mean(distances, self.fraction)


def estimate_runtime(iterations: int, shots: int, t_shot: float) -> float:
    """Projected hardware time ``4 * I * n_shot * t_shot`` in seconds."""
    if iterations < 0 or shots < 0 or t_shot < 0:
        raise DomainError("iterations, shots and t_shot must be non-negative")
    return 4 * iterations * shots * t_shot


def run_vqa(inst: TspInstance, cfg: VqaConfig = VqaConfig(), seed: Optional[int] = 0, theta0=None) -> RunRecord:
    """Optimise a circuit's angles so its samples decode to short tours."""
    codec = CodecSpec(cfg.codec, inst.n, cfg.gray, cfg.gray_scope)
    circuit = build_circuit(cfg.circuit, codec.length, rzz_params=cfg.rzz_params)
    if circuit.q != codec.length:
        raise LengthMismatchError(f"circuit has {circuit.q} qubits, codec needs {codec.length}")
    if theta0 is not None:
        theta = circuit.check_theta(theta0)
    elif cfg.warm_start:
        greedy, _ = greedy_nearest_neighbour(inst)
        theta = load_warm_start(circuit, codec.encode(greedy))
    else:
        theta = initial_parameters(circuit, cfg.init_angle)

    rng = np.random.default_rng(seed)
    cache = CostCache(inst, codec, enabled=cfg.cache)
    obj = SampledCost(circuit, cache, cfg.slice, cfg.shots, rng, cfg.backend)
    trace = []

    def track(t, th):
        avg = obj(th)
        trace.append((t, avg, obj.best))
        log.debug("t=%d sliced_avg=%.6g best=%.6g", t, avg, obj.best)

    start = time.perf_counter()
    if cfg.optimizer == "spsa":
        spsa_optimize(obj, theta, cfg.spsa, rng, track)
    elif cfg.optimizer == "param_shift":
        param_shift_optimize(obj, theta, cfg.param_shift, track)
    else:  # pragma: no cover - rejected by VqaConfig
        raise ConfigError(cfg.optimizer)
    seconds = time.perf_counter() - start

    best_bits = int_to_bits(obj.best_value, codec.length)
    return RunRecord(
        model="vqa",
        instance=inst.name,
        n=inst.n,
        seed=seed,
        config=asdict(cfg),
        trace=trace,
        best_cycle=codec.decode_int(obj.best_value),
        best_distance=obj.best,
        best_bits=best_bits,
        hits=cache.hits,
        misses=cache.misses,
        coverage=coverage(cache, inst.n).coverage,
        evaluations=obj.calls,
        seconds=seconds,
    )
