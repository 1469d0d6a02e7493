"""Penalty-free maps from bit strings to tours.

Every bit string of the right length decodes to a valid cycle that starts at
location 0, so no constraint penalties are needed.  Two layouts exist:

* ``non_factorial``: the word is split into chunks of ceil(log2 i) bits for
  i = n-1, ..., 2.  Each chunk, taken modulo i, picks the next location from
  the list of locations not yet visited.
* ``factorial``: the whole word is read as an integer, reduced modulo n!, and
  unranked into a permutation (Lehmer code).  The result is rotated so that
  location 0 comes first.

Bit strings are plain ``str`` of '0'/'1', most significant bit first.
Internally they are handled as integers together with their known length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from .errors import DomainError, InvalidCycleError, LengthMismatchError

__all__ = [
    "FACTORIAL",
    "NON_FACTORIAL",
    "CodecSpec",
    "as_bitstring",
    "bit_length",
    "bits_to_int",
    "chunk_widths",
    "decode_factorial",
    "decode_non_factorial",
    "encode_cycle",
    "factorial_permutation",
    "gray_to_index",
    "hamming",
    "index_to_gray",
    "int_to_bits",
    "interpret",
]

NON_FACTORIAL = "non_factorial"
FACTORIAL = "factorial"
KINDS = (NON_FACTORIAL, FACTORIAL)
GRAY_SCOPES = ("chunk", "word")

BitsLike = Union[str, Sequence[int]]


def as_bitstring(bits: BitsLike) -> str:
    if isinstance(bits, str):
        s = bits
    else:
        s = "".join("1" if int(b) else "0" for b in bits)
    if s.strip("01"):
        raise ValueError(f"not a bit string: {bits!r}")
    return s


def bits_to_int(bits: BitsLike) -> int:
    s = as_bitstring(bits)
    return int(s, 2) if s else 0


def int_to_bits(value: int, length: int) -> str:
    return format(value, f"0{length}b") if length else ""


def index_to_gray(k: int) -> int:
    return k ^ (k >> 1)


def _gray_decode(g: int) -> int:
    b = g
    g >>= 1
    while g:
        b ^= g
        g >>= 1
    return b


def gray_to_index(bits: BitsLike) -> int:
    """Integer whose reflected Gray code is ``bits``."""
    return _gray_decode(bits_to_int(bits))


def interpret(bits: BitsLike, gray: bool = False) -> int:
    return gray_to_index(bits) if gray else bits_to_int(bits)


def _ceil_log2(i: int) -> int:
    return (i - 1).bit_length()


@lru_cache(maxsize=None)
def chunk_widths(n: int) -> tuple:
    """Chunk widths consumed by the non-factorial decoder, for i = n-1 down to 2."""
    return tuple(_ceil_log2(i) for i in range(n - 1, 1, -1))


def bit_length(kind: str, n: int) -> int:
    """Bits needed to address every cycle of ``n`` locations with the given codec."""
    if n < 3:
        raise DomainError(f"codecs need n >= 3 locations, got {n}")
    if kind == NON_FACTORIAL:
        return sum(_ceil_log2(i) for i in range(1, n))
    if kind == FACTORIAL:
        return _ceil_log2(math.factorial(n))
    raise DomainError(f"unknown codec kind {kind!r}; expected one of {KINDS}")


def _check_length(bits: str, expected: int, kind: str, n: int) -> None:
    if len(bits) != expected:
        raise LengthMismatchError(f"{kind} codec for n={n} needs {expected} bits, got {len(bits)}")


# -- scalar decoders -------------------------------------------------------------------

def _decode_nf_value(value: int, n: int, gray: bool, word_gray: bool) -> tuple:
    widths = chunk_widths(n)
    shift = sum(widths)
    if word_gray:
        value = _gray_decode(value)
    remaining = list(range(1, n))
    order = [0]
    for i, w in zip(range(n - 1, 1, -1), widths):
        shift -= w
        j = (value >> shift) & ((1 << w) - 1)
        if gray:
            j = _gray_decode(j)
        order.append(remaining.pop(j % i))
    order.append(remaining[0])
    return tuple(order)


def factorial_permutation(x: int, n: int) -> tuple:
    """Unrank ``x mod n!`` into a permutation of 1..n (largest index = full reversal)."""
    f = math.factorial(n)
    y = x % f
    nodes = list(range(1, n + 1))
    out = []
    for i in range(n):
        f //= n - i
        k = y // f
        out.append(nodes.pop(k))
        y -= k * f
    return tuple(out)


def _rotate_to_zero(perm: Sequence[int]) -> tuple:
    p = perm.index(0)
    return tuple(perm[p:]) + tuple(perm[:p])


def _decode_f_value(value: int, n: int, gray: bool) -> tuple:
    if gray:
        value = _gray_decode(value)
    return _rotate_to_zero([v - 1 for v in factorial_permutation(value, n)])


def decode_non_factorial(bits: BitsLike, n: int, gray: bool = False) -> tuple:
    s = as_bitstring(bits)
    _check_length(s, bit_length(NON_FACTORIAL, n), NON_FACTORIAL, n)
    return _decode_nf_value(bits_to_int(s), n, gray, False)


def decode_factorial(bits: BitsLike, n: int, gray: bool = False) -> tuple:
    s = as_bitstring(bits)
    _check_length(s, bit_length(FACTORIAL, n), FACTORIAL, n)
    return _decode_f_value(bits_to_int(s), n, gray)


# -- vectorised decoders ---------------------------------------------------------------

def _gray_decode_array(g: np.ndarray, width: int) -> np.ndarray:
    b = g.copy()
    s = 1
    while s < width:
        b ^= b >> s
        s <<= 1
    return b


def _pick(remaining: np.ndarray, k: np.ndarray):
    rows = np.arange(len(k))
    picked = remaining[rows, k]
    width = remaining.shape[1]
    cols = np.arange(width - 1)
    shrunk = np.where(cols[None, :] < k[:, None], remaining[:, :-1], remaining[:, 1:])
    return picked, shrunk


def _decode_nf_batch(values: np.ndarray, n: int, gray: bool, word_gray: bool, q: int) -> np.ndarray:
    if word_gray:
        values = _gray_decode_array(values, q)
    out = np.empty((len(values), n), dtype=np.int64)
    out[:, 0] = 0
    remaining = np.tile(np.arange(1, n, dtype=np.int64), (len(values), 1))
    shift = q
    for pos, (i, w) in enumerate(zip(range(n - 1, 1, -1), chunk_widths(n)), start=1):
        shift -= w
        j = (values >> shift) & ((1 << w) - 1)
        if gray:
            j = _gray_decode_array(j, w)
        out[:, pos], remaining = _pick(remaining, j % i)
    out[:, n - 1] = remaining[:, 0]
    return out


def _decode_f_batch(values: np.ndarray, n: int, gray: bool, q: int) -> np.ndarray:
    if gray:
        values = _gray_decode_array(values, q)
    f = math.factorial(n)
    y = values % f
    perm = np.empty((len(values), n), dtype=np.int64)
    remaining = np.tile(np.arange(n, dtype=np.int64), (len(values), 1))
    for i in range(n - 1):
        f //= n - i
        k = y // f
        perm[:, i], remaining = _pick(remaining, k)
        y = y - k * f
    perm[:, n - 1] = remaining[:, 0]
    start = np.argmax(perm == 0, axis=1)
    idx = (np.arange(n)[None, :] + start[:, None]) % n
    return np.take_along_axis(perm, idx, axis=1)


@dataclass(frozen=True)
class CodecSpec:
    """Which bit-string-to-cycle map to use for an ``n``-location instance.

    ``gray_scope`` only matters for the non-factorial codec: ``"chunk"`` Gray
    decodes each selection chunk on its own, ``"word"`` decodes the whole word
    before it is split.
    """

    kind: str = NON_FACTORIAL
    n: int = 4
    gray: bool = False
    gray_scope: str = "chunk"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown codec kind {self.kind!r}; expected one of {KINDS}")
        if self.gray_scope not in GRAY_SCOPES:
            raise DomainError(f"unknown gray scope {self.gray_scope!r}")
        bit_length(self.kind, self.n)

    @property
    def length(self) -> int:
        return bit_length(self.kind, self.n)

    @property
    def _word_gray(self) -> bool:
        return self.gray and (self.kind == FACTORIAL or self.gray_scope == "word")

    def decode_int(self, value: int) -> tuple:
        """Decode a bit string given as its integer value (length implied by the codec)."""
        if self.kind == NON_FACTORIAL:
            return _decode_nf_value(value, self.n, self.gray and not self._word_gray, self._word_gray)
        return _decode_f_value(value, self.n, self.gray)

    def decode(self, bits: BitsLike) -> tuple:
        s = as_bitstring(bits)
        _check_length(s, self.length, self.kind, self.n)
        return self.decode_int(bits_to_int(s))

    def decode_batch(self, values) -> np.ndarray:
        """Decode many integer-valued bit strings at once; returns an ``(B, n)`` array."""
        q = self.length
        if q > 62:
            return np.array([self.decode_int(int(v)) for v in values], dtype=np.int64).reshape(-1, self.n)
        values = np.asarray(values, dtype=np.int64)
        if self.kind == NON_FACTORIAL:
            return _decode_nf_batch(values, self.n, self.gray and not self._word_gray, self._word_gray, q)
        return _decode_f_batch(values, self.n, self.gray, q)

    def encode(self, cycle: Sequence[int]) -> str:
        return encode_cycle(cycle, self)


def _check_fixed_start(cycle: Sequence[int], n: int) -> tuple:
    cycle = tuple(int(v) for v in cycle)
    if len(cycle) != n or set(cycle) != set(range(n)) or cycle[0] != 0:
        raise InvalidCycleError(f"{cycle} is not a permutation of 0..{n - 1} starting at 0")
    return cycle


def encode_cycle(cycle: Sequence[int], spec: CodecSpec) -> str:
    """Bit string that decodes back to ``cycle`` under ``spec``.

    The non-factorial codec has several preimages per cycle because of the
    modulo wrap; the smallest chunk value is used.
    """
    n = spec.n
    cycle = _check_fixed_start(cycle, n)
    q = spec.length
    if spec.kind == NON_FACTORIAL:
        remaining = list(range(1, n))
        value = 0
        for pos, w in enumerate(chunk_widths(n), start=1):
            k = remaining.index(cycle[pos])
            remaining.pop(k)
            j = index_to_gray(k) if spec.gray and not spec._word_gray else k
            value = (value << w) | j
        if spec._word_gray:
            value = index_to_gray(value)
        return int_to_bits(value, q)

    remaining = list(range(n))
    value = 0
    for i, v in enumerate(cycle):
        k = remaining.index(v)
        remaining.pop(k)
        value += k * math.factorial(n - 1 - i)
    if spec.gray:
        value = index_to_gray(value)
    return int_to_bits(value, q)


def hamming(a: BitsLike, b: BitsLike) -> int:
    a, b = as_bitstring(a), as_bitstring(b)
    if len(a) != len(b):
        raise LengthMismatchError(f"hamming distance needs equal lengths, got {len(a)} and {len(b)}")
    return sum(x != y for x, y in zip(a, b))
