"""The five shallow parametrised circuit layouts and their text netlists."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..codec import as_bitstring
from ..errors import ConfigError, LengthMismatchError
from .gates import ONE_QUBIT, PARAMETRIC, TWO_QUBIT

CIRCUIT_IDS = (1, 2, 3, 4, 5)

# angle used for Circuit 3's ZZ couplers when they are not tunable
FIXED_RZZ_ANGLE = math.pi / 2


@dataclass(frozen=True)
class GateOp:
    kind: str
    targets: tuple
    param_slot: Optional[int] = None
    angle: Optional[float] = None  # fixed angle for a non-tunable rotation

    def __post_init__(self):
        if self.kind in ONE_QUBIT:
            arity = 1
        elif self.kind in TWO_QUBIT:
            arity = 2
        else:
            raise ConfigError(f"unknown gate kind {self.kind!r}")
        if len(self.targets) != arity or len(set(self.targets)) != arity:
            raise ConfigError(f"{self.kind} needs {arity} distinct targets, got {self.targets}")
        if self.kind in PARAMETRIC and self.param_slot is None and self.angle is None:
            raise ConfigError(f"{self.kind} needs a parameter slot or a fixed angle")


@dataclass(frozen=True)
class CircuitSpec:
    id: int
    q: int
    gates: tuple
    param_count: int

    @property
    def entangling(self) -> bool:
        return any(g.kind in TWO_QUBIT for g in self.gates)

    def check_theta(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.size != self.param_count:
            raise LengthMismatchError(
                f"circuit {self.id} on {self.q} qubits takes {self.param_count} angles, got {theta.size}"
            )
        return theta

    def angle(self, gate: GateOp, theta: np.ndarray):
        if gate.param_slot is not None:
            return theta[gate.param_slot]
        return gate.angle

    def netlist(self) -> str:
        """One gate per line: ``KIND targets [slot]``."""
        lines = []
        for g in self.gates:
            parts = [g.kind, *map(str, g.targets)]
            if g.param_slot is not None:
                parts.append(f"[{g.param_slot}]")
            elif g.angle is not None:
                parts.append(f"={g.angle!r}")
            lines.append(" ".join(parts))
        return "\n".join(lines) + "\n"


_NETLIST_LINE = re.compile(r"^([A-Z]+)((?:\s+\d+)+)(?:\s+\[(\d+)\]|\s+=(\S+))?$")


def parse_netlist(text: str, circuit_id: int = 0) -> CircuitSpec:
    gates = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        m = _NETLIST_LINE.match(line)
        if not m:
            raise ConfigError(f"netlist line {lineno}: cannot parse {line!r}")
        kind, targets, slot, angle = m.groups()
        gates.append(GateOp(
            kind,
            tuple(int(t) for t in targets.split()),
            None if slot is None else int(slot),
            None if angle is None else float(angle),
        ))
    q = 1 + max(t for g in gates for t in g.targets)
    slots = [g.param_slot for g in gates if g.param_slot is not None]
    return CircuitSpec(circuit_id, q, tuple(gates), 1 + max(slots) if slots else 0)


def build_circuit(circuit_id: int, q: int, rzz_params: bool = True) -> CircuitSpec:
    """Gate list for one of the five circuit layouts on ``q`` qubits.

    Parameter slots are numbered in gate order.  Single-qubit layers are laid
    out layer by layer (all RY, then all RX, ...), so e.g. Circuit 2 has the RX
    angle of qubit i in slot i and the RXX angle of pair (i, i+1) in slot q + i.
    ``rzz_params=False`` pins Circuit 3's ZZ angles, giving one angle per qubit.
    """
    if circuit_id not in CIRCUIT_IDS:
        raise ConfigError(f"unknown circuit id {circuit_id}; expected one of {CIRCUIT_IDS}")
    if q < 1:
        raise ConfigError(f"need at least one qubit, got {q}")

    gates = []
    slot = 0

    def layer(kind, parametric=True):
        nonlocal slot
        for i in range(q):
            if parametric:
                gates.append(GateOp(kind, (i,), slot))
                slot += 1
            else:
                gates.append(GateOp(kind, (i,)))

    def chain(kind, parametric=True, angle=None):
        nonlocal slot
        for i in range(q - 1):
            if kind == "CX":
                gates.append(GateOp(kind, (i, i + 1)))
            elif parametric:
                gates.append(GateOp(kind, (i, i + 1), slot))
                slot += 1
            else:
                gates.append(GateOp(kind, (i, i + 1), angle=angle))

    if circuit_id == 1:
        layer("H", False)
        layer("RY")
        layer("RX")
        chain("CX")
    elif circuit_id == 2:
        layer("RX")
        chain("RXX")
    elif circuit_id == 3:
        layer("H", False)
        layer("RZ")
        chain("RZZ", rzz_params, FIXED_RZZ_ANGLE)
        layer("H", False)
    elif circuit_id == 4:
        layer("RX")
    else:
        layer("H", False)
        layer("RY")
        layer("RX")
    return CircuitSpec(circuit_id, q, tuple(gates), slot)


def load_warm_start(spec: CircuitSpec, bits) -> np.ndarray:
    """Angles that make Circuit 2 emit ``bits`` with certainty.

    RX on qubit i is pi where bit i is 1 and 0 otherwise; every RXX is 0.
    """
    if spec.id != 2:
        raise ConfigError(f"warm starts load onto circuit 2 only, not circuit {spec.id}")
    s = as_bitstring(bits)
    if len(s) != spec.q:
        raise LengthMismatchError(f"warm-start string has {len(s)} bits for {spec.q} qubits")
    theta = np.zeros(spec.param_count)
    for g in spec.gates:
        if g.kind == "RX" and s[g.targets[0]] == "1":
            theta[g.param_slot] = math.pi
    return theta


def initial_parameters(spec: CircuitSpec, value: float = 0.0) -> np.ndarray:
    """Cold-start angles: every tunable angle set to the same constant."""
    return np.full(spec.param_count, float(value))

