"""Run configurations and their default hyper-parameters."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace

from .codec import KINDS, NON_FACTORIAL
from .errors import ConfigError


@dataclass(frozen=True)
class SpsaConfig:
    A: float = 25.0
    c: float = math.pi / 10
    alpha: float = 0.602
    gamma: float = 0.101
    eta: float = 0.1
    iterations: int = 250
    shots: int = 1024
    g0_floor: float = 1e6

    def __post_init__(self):
        if not (self.alpha > 0 and self.gamma > 0 and self.c > 0 and self.eta > 0):
            raise ConfigError(f"SPSA needs alpha, gamma, c, eta > 0: {self}")
        if self.A < 0 or self.iterations < 0 or self.shots < 1:
            raise ConfigError(f"bad SPSA budget: {self}")


@dataclass(frozen=True)
class ParamShiftConfig:
    s: float = 0.5
    eta: float = 0.1
    iterations: int = 250
    shots: int = 1024

    def __post_init__(self):
        if self.s <= 0 or self.eta <= 0 or self.iterations < 0 or self.shots < 1:
            raise ConfigError(f"bad parameter-shift config: {self}")

    @property
    def shift(self) -> float:
        return math.pi / (4 * self.s)


OPTIM_DEFAULTS = {
    "sgd": {"eta": 2e-5, "momentum": 0.8, "weight_decay": 0.0006},
    "adam": {"eta": 0.001, "momentum": 0.9, "weight_decay": 0.0032},
}


@dataclass(frozen=True)
class OptimConfig:
    """Gradient-descent settings for the classical model.

    ``momentum`` is the SGD momentum, or beta1 for Adam.
    """

    kind: str = "sgd"
    eta: float = 2e-5
    momentum: float = 0.8
    weight_decay: float = 0.0006
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.kind not in OPTIM_DEFAULTS:
            raise ConfigError(f"unknown optimiser {self.kind!r}; expected sgd or adam")
        if self.weight_decay < 0 or self.eta <= 0:
            raise ConfigError(f"bad optimiser settings: {self}")

    @classmethod
    def defaults(cls, kind: str = "sgd", **overrides) -> "OptimConfig":
        if kind not in OPTIM_DEFAULTS:
            raise ConfigError(f"unknown optimiser {kind!r}; expected sgd or adam")
        values = dict(OPTIM_DEFAULTS[kind])
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(kind=kind, **values)


@dataclass(frozen=True)
class VqaConfig:
    circuit: int = 2
    codec: str = NON_FACTORIAL
    gray: bool = False
    gray_scope: str = "chunk"
    slice: float = 0.8
    optimizer: str = "spsa"
    warm_start: bool = False
    init_angle: float = 0.0
    backend: str = "auto"
    cache: bool = True
    rzz_params: bool = True
    spsa: SpsaConfig = field(default_factory=SpsaConfig)
    param_shift: ParamShiftConfig = field(default_factory=ParamShiftConfig)

    def __post_init__(self):
        if self.codec not in KINDS:
            raise ConfigError(f"unknown codec {self.codec!r}")
        if self.optimizer not in ("spsa", "param_shift"):
            raise ConfigError(f"unknown VQA optimiser {self.optimizer!r}; expected spsa or param_shift")
        if not 0 < self.slice <= 1:
            raise ConfigError(f"slice must be in (0, 1], got {self.slice}")
        if self.warm_start and self.circuit != 2:
            raise ConfigError("warm starts are only defined for circuit 2")

    @property
    def iterations(self) -> int:
        return self.spsa.iterations if self.optimizer == "spsa" else self.param_shift.iterations

    @property
    def shots(self) -> int:
        return self.spsa.shots if self.optimizer == "spsa" else self.param_shift.shots


@dataclass(frozen=True)
class MlConfig:
    layers: int = 4
    inputs: int = 64
    input_mode: str = "zeros"
    warm_start: bool = False
    sigma: float = 0.05
    epochs: int = 250
    slice: float = 1.0
    codec: str = NON_FACTORIAL
    gray: bool = False
    gray_scope: str = "chunk"
    cache: bool = True
    optim: OptimConfig = field(default_factory=OptimConfig)

    def __post_init__(self):
        if self.layers < 1 or self.inputs < 1 or self.epochs < 0:
            raise ConfigError(f"bad ML sizes: layers={self.layers}, inputs={self.inputs}, epochs={self.epochs}")
        if self.input_mode not in ("zeros", "halves"):
            raise ConfigError(f"unknown input mode {self.input_mode!r}; expected zeros or halves")
        if self.codec not in KINDS:
            raise ConfigError(f"unknown codec {self.codec!r}")
        if not 0 < self.slice <= 1:
            raise ConfigError(f"slice must be in (0, 1], got {self.slice}")
        if self.sigma < 0:
            raise ConfigError("sigma must be non-negative")


# Flat view of every default, keyed the way the command line names them.
DEFAULTS = {
    "iterations": 250,
    "epochs": 250,
    "codec": NON_FACTORIAL,
    "warm_start": False,
    "input_mode": "zeros",
    "gray": False,
    "circuit": 2,
    "layers": 4,
    "shots": 1024,
    "inputs": 64,
    "optimizer": "spsa",
    "ml_optimizer": "sgd",
    "slice": 0.8,
    "ml_slice": 1.0,
    "A": 25.0,
    "c": math.pi / 10,
    "alpha": 0.602,
    "eta": 0.1,
    "gamma": 0.101,
    "ps_eta": 0.1,
    "s": 0.5,
    "sigma": 0.05,
    "sgd_lr": 2e-5,
    "sgd_momentum": 0.8,
    "sgd_weight_decay": 0.0006,
    "adam_lr": 0.001,
    "adam_beta1": 0.9,
    "adam_weight_decay": 0.0032,
}


def to_dict(cfg) -> dict:
    return asdict(cfg)


def _build(cls, data: dict):
    names = {f.name: f for f in fields(cls)}
    unknown = set(data) - set(names)
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    nested = {"spsa": SpsaConfig, "param_shift": ParamShiftConfig, "optim": OptimConfig}
    kwargs = {}
    for k, v in data.items():
        if k in nested and isinstance(v, dict):
            v = _build(nested[k], v)
        kwargs[k] = v
    return cls(**kwargs)


def vqa_from_dict(data: dict) -> VqaConfig:
    return _build(VqaConfig, data)


def ml_from_dict(data: dict) -> MlConfig:
    data = dict(data)
    optim = data.get("optim")
    if isinstance(optim, dict):
        data["optim"] = OptimConfig.defaults(optim.get("kind", "sgd"), **{k: v for k, v in optim.items() if k != "kind"})
    return _build(MlConfig, data)


__all__ = [
    "DEFAULTS",
    "MlConfig",
    "OptimConfig",
    "ParamShiftConfig",
    "SpsaConfig",
    "VqaConfig",
    "ml_from_dict",
    "replace",
    "to_dict",
    "vqa_from_dict",
]
