"""Problem instances, tour lengths, classical reference solvers and quality metrics."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from itertools import permutations
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, InstanceParseError, InstanceTooSmallError, InvalidCycleError, ResourceLimitError

__all__ = [
    "MAX_BRUTE_FORCE_N",
    "QualityReport",
    "TspInstance",
    "brute_force_optimum",
    "check_cycle",
    "greedy_nearest_neighbour",
    "load_instance",
    "load_reference_optima",
    "quality",
    "random_instance",
    "save_instance",
    "sem",
    "tour_length",
]

MAX_BRUTE_FORCE_N = 13

# (n-1)!/2 candidate cycles are scored in blocks of at most 8! suffixes.
_SUFFIX_LEN = 8
_TIE_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class TspInstance:
    """Symmetric Euclidean TSP instance built from 2-D coordinates."""

    coords: tuple
    name: str = "instance"
    dist: np.ndarray = field(init=False, repr=False)
    _rows: tuple = field(init=False, repr=False)

    def __post_init__(self):
        coords = tuple((float(x), float(y)) for x, y in self.coords)
        if len(coords) < 3:
            raise InstanceTooSmallError(f"a tour needs at least 3 locations, got {len(coords)}")
        xy = np.array(coords, dtype=np.float64)
        dist = np.hypot(xy[:, None, 0] - xy[None, :, 0], xy[:, None, 1] - xy[None, :, 1])
        dist.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "dist", dist)
        # plain-float rows make scalar lookups in hot loops cheap
        object.__setattr__(self, "_rows", tuple(tuple(row) for row in dist.tolist()))

    @property
    def n(self) -> int:
        return len(self.coords)

    def __repr__(self):
        return f"TspInstance(name={self.name!r}, n={self.n})"


def random_instance(n: int, seed: int, size: float = 100.0, name: Optional[str] = None) -> TspInstance:
    """Draw ``n`` locations uniformly from a ``size`` x ``size`` square."""
    rng = np.random.default_rng(seed)
    xy = rng.uniform(0.0, size, size=(n, 2))
    return TspInstance(tuple(map(tuple, xy)), name=name or f"uniform{n}_s{seed}")


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def load_instance(path) -> TspInstance:
    """Read a coordinate CSV with one ``x,y`` pair per line.

    A first line whose leading token is not numeric is treated as a header.
    Blank lines are ignored.
    """
    path = Path(path)
    coords = []
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = [p.strip() for p in line.split(",")]
            if not coords and lineno == 1 and not _is_number(parts[0]):
                continue
            if len(parts) != 2:
                raise InstanceParseError(path, lineno, line)
            try:
                x, y = float(parts[0]), float(parts[1])
            except ValueError:
                raise InstanceParseError(path, lineno, line, "non-numeric coordinate") from None
            if not (math.isfinite(x) and math.isfinite(y)):
                raise InstanceParseError(path, lineno, line, "non-finite coordinate")
            coords.append((x, y))
    if len(coords) < 3:
        raise InstanceTooSmallError(f"{path}: need at least 3 locations, found {len(coords)}")
    return TspInstance(tuple(coords), name=path.stem)


def save_instance(inst: TspInstance, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("x,y\n")
        for x, y in inst.coords:
            fh.write(f"{x!r},{y!r}\n")


def load_reference_optima(path) -> dict:
    """Read a ``name,optimum`` sidecar of published optimal tour lengths."""
    out = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not row[0].strip():
                continue
            if len(row) != 2:
                raise InstanceParseError(path, lineno, ",".join(row), "expected 'name,optimum'")
            name, value = row[0].strip(), row[1].strip()
            if not _is_number(value):
                if lineno == 1:
                    continue
                raise InstanceParseError(path, lineno, ",".join(row), "non-numeric optimum")
            out[name] = float(value)
    return out


def check_cycle(inst: TspInstance, order: Sequence[int], fixed_start: bool = False) -> tuple:
    order = tuple(int(v) for v in order)
    if len(order) != inst.n or set(order) != set(range(inst.n)):
        raise InvalidCycleError(f"{order} is not a permutation of 0..{inst.n - 1}")
    if fixed_start and order[0] != 0:
        raise InvalidCycleError(f"{order} does not start at location 0")
    return order


def _length(rows, order) -> float:
    # fsum is correctly rounded, so the value does not depend on edge order
    return math.fsum(rows[a][b] for a, b in zip(order, order[1:] + order[:1]))


def tour_length(inst: TspInstance, order: Sequence[int]) -> float:
    """Closed tour length, including the edge back to the first location."""
    return _length(inst._rows, check_cycle(inst, order))


def brute_force_optimum(inst: TspInstance):
    """Exact optimum by enumerating all (n-1)!/2 distinct cycles.

    Location 0 is fixed first and mirror images are skipped by requiring
    ``order[1] < order[-1]``.  Returns ``(cycle, length)``.
    """
    n = inst.n
    if n > MAX_BRUTE_FORCE_N:
        raise ResourceLimitError(
            f"brute force is limited to n <= {MAX_BRUTE_FORCE_N} locations "
            f"({math.factorial(n - 1) // 2} cycles for n={n})"
        )
    D = inst.dist
    rest = n - 1
    m = min(rest, _SUFFIX_LEN)
    p = rest - m
    tails_local = np.array(list(permutations(range(m))), dtype=np.intp)
    locations = set(range(1, n))

    best = math.inf
    candidates = []
    for prefix in permutations(range(1, n), p):
        remaining = np.array(sorted(locations.difference(prefix)), dtype=np.intp)
        tails = remaining[tails_local]
        first = prefix[0] if p else tails[:, 0]
        tails = tails[first < tails[:, -1]]
        if not len(tails):
            continue
        if p:
            head = math.fsum(D[a, b] for a, b in zip((0,) + prefix, prefix))
            cost = head + D[prefix[-1], tails[:, 0]]
        else:
            cost = D[0, tails[:, 0]].copy()
        cost += D[tails[:, :-1], tails[:, 1:]].sum(axis=1) + D[tails[:, -1], 0]
        bmin = float(cost.min())
        if bmin <= best * (1 + _TIE_RTOL):
            best = min(best, bmin)
            for i in np.flatnonzero(cost <= bmin * (1 + _TIE_RTOL)):
                candidates.append((float(cost[i]), (0,) + prefix + tuple(int(v) for v in tails[i])))

    # rescore near-ties exactly so the reported length matches tour_length
    scored = [(_length(inst._rows, c), c) for v, c in candidates if v <= best * (1 + _TIE_RTOL)]
    length, cycle = min(scored)
    return cycle, length


def greedy_nearest_neighbour(inst: TspInstance):
    """Nearest-neighbour tour from location 0; ties go to the lowest index."""
    rows = inst._rows
    order = [0]
    unvisited = list(range(1, inst.n))
    while unvisited:
        here = rows[order[-1]]
        nxt = min(unvisited, key=lambda v: (here[v], v))
        unvisited.remove(nxt)
        order.append(nxt)
    order = tuple(order)
    return order, _length(rows, order)


@dataclass(frozen=True)
class QualityReport:
    d_sim: float
    d_best: float
    q_sol: float
    e_sol: float
    sem: Optional[float] = None


def sem(values) -> Optional[float]:
    """Standard error of the mean, sigma / sqrt(r - 1) with the population sigma."""
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return None
    return float(np.std(values) / math.sqrt(values.size - 1))


def quality(d_sim: float, d_best: float, per_run_values=None) -> QualityReport:
    """Solution quality ``d_best / d_sim``; ``per_run_values`` feed the SEM."""
    if not (d_sim > 0 and d_best > 0):
        raise DomainError(f"distances must be positive, got d_sim={d_sim}, d_best={d_best}")
    q = d_best / d_sim
    return QualityReport(d_sim, d_best, q, 1.0 - q, sem(per_run_values if per_run_values is not None else ()))
