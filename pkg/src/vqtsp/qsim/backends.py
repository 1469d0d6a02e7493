"""Simulator back ends: dense statevector, product state, and an exact chain (MPS) state.

All three start from |0...0> and apply the gate list in order.  Qubit i is
bit i of the sampled string (most significant first), so the dense index of
a basis state equals the integer value of its bit string.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..codec import int_to_bits
from ..errors import ConfigError, ResourceLimitError
from . import gates as G
from .circuits import CircuitSpec

DENSE_MAX_QUBITS = 25
# the chain back end wins on time and memory from about this many qubits
AUTO_CHAIN_FROM = 15
# singular values below this fraction of the largest are exact zeros up to rounding
_SVD_CUTOFF = 1e-13


@dataclass(frozen=True)
class SampleBatch:
    """Measurement outcomes of one sampling call.

    ``values`` holds the distinct outcomes as bit-string integers (sorted);
    ``counts`` how often each occurred.
    """

    q: int
    values: np.ndarray
    counts: np.ndarray

    @property
    def shots(self) -> int:
        return int(self.counts.sum())

    def as_dict(self) -> dict:
        return {int_to_bits(int(v), self.q): int(c) for v, c in zip(self.values, self.counts)}

    def per_shot(self) -> np.ndarray:
        return np.repeat(self.values, self.counts)


def rows_to_values(bits: np.ndarray) -> np.ndarray:
    """Pack an ``(shots, q)`` 0/1 array into one integer per row, bit 0 most significant."""
    shots, q = bits.shape
    if q <= 62:
        weights = np.left_shift(np.int64(1), np.arange(q - 1, -1, -1, dtype=np.int64))
        return bits.astype(np.int64) @ weights
    return np.array([int("".join("1" if b else "0" for b in row), 2) for row in bits], dtype=object)


def batch_from_values(q: int, values: np.ndarray) -> SampleBatch:
    uniq, counts = np.unique(values, return_counts=True)
    return SampleBatch(q, uniq, counts)


# -- dense ------------------------------------------------------------------------------

# below this many trailing amplitudes a batched 2x2 matmul is slow, so the gate is
# expanded to kron(U, I) and applied as one wide matrix product instead
_KRON_MAX_INNER = 16


def _apply_local(psi: np.ndarray, U: np.ndarray, outer: int, inner: int) -> np.ndarray:
    k = U.shape[0]
    if inner <= _KRON_MAX_INNER:
        return (psi.reshape(-1, k * inner) @ np.kron(U, np.eye(inner)).T).reshape(-1)
    return np.matmul(U, psi.reshape(outer, k, inner)).reshape(-1)


def _apply_1q(psi: np.ndarray, U: np.ndarray, t: int, q: int) -> np.ndarray:
    return _apply_local(psi, U, 1 << t, 1 << (q - t - 1))


def _apply_2q(psi: np.ndarray, U: np.ndarray, a: int, b: int, q: int) -> np.ndarray:
    if b == a + 1:
        return _apply_local(psi, U, 1 << a, 1 << (q - a - 2))
    tensor = psi.reshape((2,) * q)
    out = np.tensordot(U.reshape(2, 2, 2, 2), tensor, axes=([2, 3], [a, b]))
    return np.moveaxis(out, [0, 1], [a, b]).reshape(-1)


class DenseState:
    backend = "dense"

    def __init__(self, spec: CircuitSpec, theta):
        q = spec.q
        if q > DENSE_MAX_QUBITS:
            raise ResourceLimitError(
                f"dense statevector simulation is limited to {DENSE_MAX_QUBITS} qubits; "
                f"circuit {spec.id} needs {q} (2^{q} amplitudes)"
            )
        theta = spec.check_theta(theta)
        psi = np.zeros(1 << q, dtype=np.complex128)
        psi[0] = 1.0
        for g in spec.gates:
            U = G.matrix(g.kind, spec.angle(g, theta))
            if len(g.targets) == 1:
                psi = _apply_1q(psi, U, g.targets[0], q)
            else:
                psi = _apply_2q(psi, U, g.targets[0], g.targets[1], q)
        self.q = q
        self.psi = psi

    def statevector(self) -> np.ndarray:
        return self.psi

    def probabilities(self) -> np.ndarray:
        return np.abs(self.psi) ** 2

    def sample(self, shots: int, rng: np.random.Generator) -> SampleBatch:
        cdf = np.cumsum(self.probabilities())
        idx = np.searchsorted(cdf, rng.random(shots) * cdf[-1], side="right")
        np.minimum(idx, cdf.size - 1, out=idx)
        return batch_from_values(self.q, idx.astype(np.int64))


# -- product ----------------------------------------------------------------------------

class ProductState:
    """Per-qubit two-amplitude states; only valid for circuits without two-qubit gates."""

    backend = "product"

    def __init__(self, spec: CircuitSpec, theta):
        if spec.entangling:
            raise ConfigError(f"circuit {spec.id} entangles qubits; the product back end cannot run it")
        theta = spec.check_theta(theta)
        qubits = np.zeros((spec.q, 2), dtype=np.complex128)
        qubits[:, 0] = 1.0
        for g in spec.gates:
            t = g.targets[0]
            qubits[t] = G.matrix(g.kind, spec.angle(g, theta)) @ qubits[t]
        self.q = spec.q
        self.qubits = qubits

    def p_one(self) -> np.ndarray:
        return np.abs(self.qubits[:, 1]) ** 2

    def statevector(self) -> np.ndarray:
        _guard_full(self.q)
        psi = np.ones(1, dtype=np.complex128)
        for amp in self.qubits:
            psi = np.kron(psi, amp)
        return psi

    def probabilities(self) -> np.ndarray:
        return np.abs(self.statevector()) ** 2

    def sample(self, shots: int, rng: np.random.Generator) -> SampleBatch:
        bits = rng.random((shots, self.q)) < self.p_one()
        return batch_from_values(self.q, rows_to_values(bits))


# -- chain (matrix product state) -------------------------------------------------------

class ChainState:
    """Exact matrix-product state for circuits whose two-qubit gates act on neighbours.

    Bonds are split by SVD keeping every non-zero singular value, so nothing is
    truncated; the circuits here keep every bond at dimension 2 or less.
    """

    backend = "mps"

    def __init__(self, spec: CircuitSpec, theta):
        theta = spec.check_theta(theta)
        q = spec.q
        site = np.zeros((1, 2, 1), dtype=np.complex128)
        site[0, 0, 0] = 1.0
        tensors = [site.copy() for _ in range(q)]
        for g in spec.gates:
            U = G.matrix(g.kind, spec.angle(g, theta))
            if len(g.targets) == 1:
                t = g.targets[0]
                tensors[t] = np.einsum("ij,ajb->aib", U, tensors[t])
                continue
            a, b = g.targets
            if b != a + 1:
                raise ConfigError(f"mps back end needs nearest-neighbour gates, got {g.kind} on {g.targets}")
            left, right = tensors[a], tensors[b]
            pair = np.einsum("aib,bjc->aijc", left, right)
            pair = np.einsum("klij,aijc->aklc", U.reshape(2, 2, 2, 2), pair)
            dl, dr = left.shape[0], right.shape[2]
            u, s, vh = np.linalg.svd(pair.reshape(dl * 2, 2 * dr), full_matrices=False)
            r = max(1, int(np.count_nonzero(s > s[0] * _SVD_CUTOFF)))
            tensors[a] = (u[:, :r] * s[:r]).reshape(dl, 2, r)
            tensors[b] = vh[:r].reshape(r, 2, dr)
        self.q = q
        self.tensors = tensors

    @property
    def bond_dims(self):
        return [t.shape[2] for t in self.tensors[:-1]]

    def statevector(self) -> np.ndarray:
        _guard_full(self.q)
        psi = np.ones((1, 1), dtype=np.complex128)
        for t in self.tensors:
            psi = np.einsum("pa,aib->pib", psi, t).reshape(-1, t.shape[2])
        return psi.reshape(-1)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.statevector()) ** 2

    def _right_environments(self):
        envs = [None] * (self.q + 1)
        envs[self.q] = np.ones((1, 1), dtype=np.complex128)
        for i in range(self.q - 1, -1, -1):
            A = self.tensors[i]
            envs[i] = np.einsum("axb,bc,dxc->ad", A, envs[i + 1], A.conj())
        return envs

    def sample(self, shots: int, rng: np.random.Generator) -> SampleBatch:
        envs = self._right_environments()
        u = rng.random((shots, self.q))
        left = np.ones((shots, 1), dtype=np.complex128)
        bits = np.zeros((shots, self.q), dtype=bool)
        for i, A in enumerate(self.tensors):
            R = envs[i + 1]
            v0 = left @ A[:, 0, :]
            v1 = left @ A[:, 1, :]
            p0 = np.einsum("sa,ab,sb->s", v0, R, v0.conj()).real.clip(min=0.0)
            p1 = np.einsum("sa,ab,sb->s", v1, R, v1.conj()).real.clip(min=0.0)
            one = u[:, i] * (p0 + p1) < p1
            bits[:, i] = one
            chosen = np.where(one, p1, p0)
            left = np.where(one[:, None], v1, v0) / np.sqrt(chosen)[:, None]
        return batch_from_values(self.q, rows_to_values(bits))


def _guard_full(q: int) -> None:
    if q > DENSE_MAX_QUBITS:
        raise ResourceLimitError(f"expanding to a full statevector is limited to {DENSE_MAX_QUBITS} qubits, got {q}")


BACKENDS = {"dense": DenseState, "product": ProductState, "mps": ChainState}


def simulate(spec: CircuitSpec, theta, backend: str = "auto"):
    """Run ``spec`` at angles ``theta`` and return a state object.

    ``auto`` uses the product back end for entanglement-free circuits.  For
    entangling ones it picks the dense back end up to ``AUTO_CHAIN_FROM - 1``
    qubits and the exact chain back end up to the dense limit; beyond that
    the explicit ``mps`` back end must be requested.
    """
    if backend == "auto":
        if not spec.entangling:
            backend = "product"
        else:
            if spec.q > DENSE_MAX_QUBITS:
                raise ResourceLimitError(
                    f"entangling circuits are limited to the dense-path limit of {DENSE_MAX_QUBITS} qubits "
                    f"(got {spec.q}); pass backend='mps' to use the chain simulator"
                )
            backend = "dense" if spec.q < AUTO_CHAIN_FROM else "mps"
    try:
        cls = BACKENDS[backend]
    except KeyError:
        raise ConfigError(f"unknown simulator back end {backend!r}; expected auto, {', '.join(BACKENDS)}") from None
    return cls(spec, theta)


def sample(spec: CircuitSpec, theta, shots: int, rng_seed=None, backend: str = "auto") -> SampleBatch:
    """Draw ``shots`` measurement outcomes; ``rng_seed`` may be a seed or a Generator."""
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    return simulate(spec, theta, backend).sample(int(shots), rng)
