"""Classical simulation of the shallow parametrised circuits."""

from .backends import (
    BACKENDS,
    AUTO_CHAIN_FROM,
    DENSE_MAX_QUBITS,
    ChainState,
    DenseState,
    ProductState,
    SampleBatch,
    batch_from_values,
    rows_to_values,
    sample,
    simulate,
)
from .circuits import (
    CIRCUIT_IDS,
    CircuitSpec,
    GateOp,
    build_circuit,
    initial_parameters,
    load_warm_start,
    parse_netlist,
)

__all__ = [
    "BACKENDS",
    "CIRCUIT_IDS",
    "AUTO_CHAIN_FROM",
    "DENSE_MAX_QUBITS",
    "ChainState",
    "CircuitSpec",
    "DenseState",
    "GateOp",
    "ProductState",
    "SampleBatch",
    "batch_from_values",
    "build_circuit",
    "initial_parameters",
    "load_warm_start",
    "parse_netlist",
    "rows_to_values",
    "sample",
    "simulate",
]
