"""Bit-string cost evaluation with memoisation and hit/miss accounting."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from .codec import CodecSpec, as_bitstring, bits_to_int
from .errors import DomainError, LengthMismatchError
from .qsim import SampleBatch
from .tsp import TspInstance, _length

__all__ = [
    "CostCache",
    "CoverageReport",
    "batch_average",
    "coverage",
    "distinct_cycles",
    "slice_count",
    "sliced_mean",
]


class CostCache:
    """Maps bit strings to tour lengths, counting hits and misses.

    Keys are the raw bit strings (as integers), not decoded cycles, so Gray
    and codec variants never share entries.  With ``enabled=False`` every
    query is recomputed and counted as a miss.
    """

    def __init__(self, inst: TspInstance, codec: CodecSpec, enabled: bool = True):
        if codec.n != inst.n:
            raise DomainError(f"codec is for n={codec.n} but the instance has n={inst.n}")
        self.inst = inst
        self.codec = codec
        self.enabled = enabled
        self.table = {}
        self.hits = 0
        self.misses = 0
        self._lock = threading.Lock()

    @property
    def queries(self) -> int:
        return self.hits + self.misses

    def reset(self) -> None:
        self.table.clear()
        self.hits = self.misses = 0

    def stats(self) -> dict:
        return {"hits": self.hits, "misses": self.misses, "queries": self.queries}

    def distance_of(self, value: int) -> float:
        """Fresh decode and tour length; bypasses the table and the counters."""
        return _length(self.inst._rows, self.codec.decode_int(value))

    def lookup(self, value: int) -> float:
        with self._lock:
            return self._lookup(value)

    def _lookup(self, value: int) -> float:
        if self.enabled:
            d = self.table.get(value)
            if d is not None:
                self.hits += 1
                return d
        d = self.distance_of(value)
        self.misses += 1
        if self.enabled:
            self.table[value] = d
        return d

    def evaluate(self, bits) -> float:
        """Tour length of the cycle that ``bits`` decodes to."""
        s = as_bitstring(bits)
        if len(s) != self.codec.length:
            raise LengthMismatchError(f"expected {self.codec.length} bits, got {len(s)}")
        return self.lookup(bits_to_int(s))

    def evaluate_batch(self, batch: SampleBatch) -> np.ndarray:
        """Per-shot distances, in the order of ``batch.per_shot()``.

        Every shot is one query.  With the cache enabled, repeated outcomes in
        the batch are served from the table (one miss, the rest hits).
        """
        if batch.q != self.codec.length:
            raise LengthMismatchError(f"batch has {batch.q}-bit strings, codec needs {self.codec.length}")
        with self._lock:
            return self._evaluate_batch(batch)

    def _evaluate_batch(self, batch: SampleBatch) -> np.ndarray:
        if not self.enabled:
            return np.array([self._lookup(int(v)) for v in batch.per_shot()], dtype=float)
        per_value = np.empty(len(batch.values), dtype=float)
        table = self.table
        for i, (v, c) in enumerate(zip(batch.values.tolist(), batch.counts.tolist())):
            d = table.get(v)
            if d is None:
                d = table[v] = self.distance_of(v)
                self.misses += 1
                self.hits += c - 1
            else:
                self.hits += c
            per_value[i] = d
        return np.repeat(per_value, batch.counts)


def slice_count(shots: int, fraction: float) -> int:
    """Number of lowest-distance shots kept by a slice, never fewer than one."""
    if not 0 < fraction <= 1:
        raise DomainError(f"slice fraction must be in (0, 1], got {fraction}")
    # the epsilon absorbs products such as 0.29 * 100 = 28.999999999999996
    return max(1, min(shots, math.floor(fraction * shots + 1e-9)))


def sliced_mean(distances, fraction: float = 1.0) -> float:
    """Mean of the lowest ``fraction`` of the distances."""
    d = np.sort(np.asarray(distances, dtype=float))
    if d.size == 0:
        raise DomainError("cannot average an empty batch")
    return math.fsum(d[: slice_count(d.size, fraction)]) / slice_count(d.size, fraction)


def batch_average(batch: SampleBatch, fraction: float, cache: CostCache):
    """Sliced average of a sampled batch; returns ``(average, per-shot distances)``."""
    if batch.shots == 0:
        raise DomainError("cannot average an empty batch")
    distances = cache.evaluate_batch(batch)
    return sliced_mean(distances, fraction), distances


def distinct_cycles(n: int) -> int:
    """Number of undirected Hamiltonian cycles through ``n`` locations, (n-1)!/2."""
    if n < 3:
        raise DomainError(f"need n >= 3, got {n}")
    return math.factorial(n - 1) // 2


@dataclass(frozen=True)
class CoverageReport:
    queries: int
    p_n: int
    coverage: float

    @property
    def exceeds_space(self) -> bool:
        """True when more strings were evaluated than there are distinct cycles."""
        return self.queries > self.p_n


def coverage(queries, n: int) -> CoverageReport:
    """Coverage of the cycle space; ``queries`` is a count or a :class:`CostCache`."""
    if isinstance(queries, CostCache):
        queries = queries.queries
    p_n = distinct_cycles(n)
    return CoverageReport(int(queries), p_n, queries / p_n)
