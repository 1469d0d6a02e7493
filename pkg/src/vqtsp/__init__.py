"""Penalty-free TSP formulations solved with simulated variational circuits and a classical analogue."""

__version__ = "0.1.0"

from .codec import CodecSpec, bit_length, decode_factorial, decode_non_factorial, encode_cycle
from .config import MlConfig, OptimConfig, ParamShiftConfig, SpsaConfig, VqaConfig
from .cost import CostCache, coverage, distinct_cycles, sliced_mean
from .errors import (
    ConfigError,
    DataError,
    DomainError,
    InstanceParseError,
    InstanceTooSmallError,
    InvalidCycleError,
    LengthMismatchError,
    ResourceLimitError,
    TspError,
)
from .ml import run_ml
from .optimize import estimate_runtime, run_vqa
from .records import RunRecord
from .tsp import (
    TspInstance,
    brute_force_optimum,
    greedy_nearest_neighbour,
    load_instance,
    quality,
    random_instance,
    tour_length,
)

__all__ = [
    "CodecSpec",
    "ConfigError",
    "CostCache",
    "DataError",
    "DomainError",
    "InstanceParseError",
    "InstanceTooSmallError",
    "InvalidCycleError",
    "LengthMismatchError",
    "MlConfig",
    "OptimConfig",
    "ParamShiftConfig",
    "ResourceLimitError",
    "RunRecord",
    "SpsaConfig",
    "TspError",
    "TspInstance",
    "VqaConfig",
    "bit_length",
    "brute_force_optimum",
    "coverage",
    "decode_factorial",
    "decode_non_factorial",
    "distinct_cycles",
    "encode_cycle",
    "estimate_runtime",
    "greedy_nearest_neighbour",
    "load_instance",
    "quality",
    "random_instance",
    "run_ml",
    "run_vqa",
    "sliced_mean",
    "tour_length",
]
