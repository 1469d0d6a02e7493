"""Monte Carlo baseline, experiment plans and result tables."""

from __future__ import annotations

import csv
import hashlib
import itertools
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .codec import CodecSpec, int_to_bits
from .config import VqaConfig, ml_from_dict, vqa_from_dict
from .cost import coverage
from .errors import ConfigError, DataError, DomainError, TspError
from .ml import run_ml
from .optimize import run_vqa
from .records import RunRecord
from .tsp import (
    MAX_BRUTE_FORCE_N,
    TspInstance,
    _length,
    brute_force_optimum,
    greedy_nearest_neighbour,
    load_instance,
    random_instance,
    sem,
)

log = logging.getLogger(__name__)

__all__ = [
    "CSV_COLUMNS",
    "MODELS",
    "ExperimentPlan",
    "ResultRow",
    "config_digest",
    "derive_seed",
    "load_plan",
    "monte_carlo",
    "run_greedy",
    "run_model",
    "run_monte_carlo",
    "run_plan",
    "write_results",
]

MODELS = ("vqa", "ml", "monte_carlo", "greedy")
CSV_COLUMNS = (
    "n", "model", "codec", "gray", "slice", "circuit_or_layers", "optimizer",
    "r", "mean_quality", "sem", "bitstrings", "coverage", "seconds",
)
_MC_CHUNK = 1 << 16
_TIE_RTOL = 1e-9


def _draw_values(rng: np.random.Generator, q: int, size: int) -> np.ndarray:
    if q <= 62:
        return rng.integers(0, 1 << q, size=size, dtype=np.int64)
    bits = rng.integers(0, 2, size=(size, q), dtype=np.int8)
    return np.array([int("".join(map(str, r)), 2) for r in bits.tolist()], dtype=object)


def monte_carlo(inst: TspInstance, codec: CodecSpec, budget: int, seed=None):
    """Minimum over ``budget`` uniformly random bit strings.

    Draws are made in fixed-size chunks, so a smaller budget with the same
    seed sees a prefix of the same strings.  Returns ``(cycle, distance, bits)``.
    """
    if budget < 1:
        raise DomainError(f"budget must be >= 1, got {budget}")
    rng = np.random.default_rng(seed)
    D = inst.dist
    best_approx, candidates = math.inf, []
    for start in range(0, budget, _MC_CHUNK):
        values = _draw_values(rng, codec.length, _MC_CHUNK)[: budget - start]
        tours = codec.decode_batch(values)
        d = D[tours[:, :-1], tours[:, 1:]].sum(axis=1) + D[tours[:, -1], tours[:, 0]]
        m = float(d.min())
        if m <= best_approx * (1 + _TIE_RTOL):
            best_approx = min(best_approx, m)
            for i in np.flatnonzero(d <= m * (1 + _TIE_RTOL)):
                candidates.append((int(values[i]), tuple(int(v) for v in tours[i])))
    # exact rescoring; the earliest draw wins ties
    best = None
    for value, cycle in candidates:
        length = _length(inst._rows, cycle)
        if best is None or length < best[1]:
            best = (cycle, length, value)
    cycle, length, value = best
    return cycle, length, int_to_bits(value, codec.length)


def derive_seed(base: int, *keys: int) -> int:
    """Independent, reproducible seed for one (instance, run) pair."""
    return int(np.random.SeedSequence([int(base), *map(int, keys)]).generate_state(1)[0])


def config_digest(cfg: dict) -> str:
    return hashlib.sha1(json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:10]


@dataclass
class ExperimentPlan:
    """A grid of configurations run ``runs`` times on every instance.

    ``instances`` entries are ``{"path": ...}`` or ``{"n": ..., "seed": ...}``,
    optionally with a ``"reference"`` optimum.  ``base`` and each ``grid``
    combination are merged into per-model config dictionaries; keys that a
    model does not use are ignored for that model.  Monte Carlo cells take
    their budget from the ``match`` model in the same cell, or from
    ``budget`` when no such model is in the plan.
    """

    instances: list
    models: list = field(default_factory=lambda: ["vqa"])
    base: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    runs: int = 5
    seed: int = 0
    match: str = "vqa"
    budget: Optional[int] = None
    name: str = "plan"

    def __post_init__(self):
        bad = [m for m in self.models if m not in MODELS]
        if bad:
            raise ConfigError(f"unknown models {bad}; expected some of {MODELS}")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if not self.instances:
            raise ConfigError("a plan needs at least one instance")
        if "monte_carlo" in self.models and self.match not in self.models and self.budget is None:
            raise ConfigError("Monte Carlo needs a matched model in the plan or an explicit budget")

    def cells(self) -> list:
        """Every configuration in grid order, as a dict of overrides."""
        keys = list(self.grid)
        return [dict(self.base, **dict(zip(keys, combo))) for combo in itertools.product(*(self.grid[k] for k in keys))]


def load_plan(path) -> ExperimentPlan:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DataError(f"{path}: no such plan file") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from None
    data.setdefault("name", path.stem)
    base_dir = path.parent
    for spec in data.get("instances", []):
        if "path" in spec and not Path(spec["path"]).is_absolute():
            spec["path"] = str(base_dir / spec["path"])
    try:
        return ExperimentPlan(**data)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _resolve_instance(spec: dict) -> TspInstance:
    if "path" in spec:
        return load_instance(spec["path"])
    if "n" in spec:
        return random_instance(int(spec["n"]), int(spec.get("seed", 0)))
    raise ConfigError(f"instance entry needs 'path' or 'n': {spec}")


_VQA_KEYS = {"circuit", "codec", "gray", "gray_scope", "slice", "optimizer", "warm_start", "init_angle",
             "backend", "cache", "rzz_params", "spsa", "param_shift"}
_ML_KEYS = {"layers", "inputs", "input_mode", "warm_start", "sigma", "epochs", "ml_slice", "codec", "gray",
            "gray_scope", "cache", "optim"}


def model_config(model: str, overrides: dict):
    """Build the typed config for ``model`` from a flat override dict."""
    if model == "vqa":
        return vqa_from_dict({k: v for k, v in overrides.items() if k in _VQA_KEYS})
    if model == "ml":
        data = {k: v for k, v in overrides.items() if k in _ML_KEYS}
        if "ml_slice" in data:
            data["slice"] = data.pop("ml_slice")
        return ml_from_dict(data)
    codec = overrides.get("codec", VqaConfig.codec)
    return {"codec": codec, "gray": bool(overrides.get("gray", False)), "gray_scope": overrides.get("gray_scope", "chunk")}


def run_model(model: str, inst: TspInstance, cfg, seed: int, budget: Optional[int] = None) -> RunRecord:
    if model == "vqa":
        return run_vqa(inst, cfg, seed)
    if model == "ml":
        return run_ml(inst, cfg, seed)
    if model == "monte_carlo":
        return run_monte_carlo(inst, cfg, budget, seed)
    if model == "greedy":
        return run_greedy(inst)
    raise ConfigError(f"unknown model {model!r}")


def run_monte_carlo(inst: TspInstance, cfg: dict, budget: int, seed) -> RunRecord:
    codec = CodecSpec(cfg.get("codec", VqaConfig.codec), inst.n, cfg.get("gray", False), cfg.get("gray_scope", "chunk"))
    start = time.perf_counter()
    cycle, length, bits = monte_carlo(inst, codec, budget, seed)
    return RunRecord(
        model="monte_carlo", instance=inst.name, n=inst.n, seed=seed, config=dict(cfg, budget=budget),
        best_cycle=cycle, best_distance=length, best_bits=bits, misses=budget,
        coverage=coverage(budget, inst.n).coverage, evaluations=1, seconds=time.perf_counter() - start,
    )


def run_greedy(inst: TspInstance) -> RunRecord:
    start = time.perf_counter()
    cycle, length = greedy_nearest_neighbour(inst)
    return RunRecord(
        model="greedy", instance=inst.name, n=inst.n, seed=None, config={},
        best_cycle=cycle, best_distance=length, evaluations=1, seconds=time.perf_counter() - start,
    )


@dataclass
class ResultRow:
    n: int
    model: str
    codec: str
    gray: bool
    slice: float
    circuit_or_layers: int
    optimizer: str
    r: int
    mean_quality: Optional[float]
    sem: Optional[float]
    bitstrings: float
    coverage: float
    seconds: Optional[float]
    digest: str = ""
    qualities: list = field(default_factory=list)
    error: Optional[str] = None

    def csv_row(self, timing: bool = False) -> list:
        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, float):
                return repr(v)
            return str(v)

        values = asdict(self)
        values["seconds"] = self.seconds if timing else None
        return [fmt(values[c]) for c in CSV_COLUMNS]


def _describe(model: str, cfg) -> tuple:
    """(codec, gray, slice, circuit_or_layers, optimizer) for the CSV."""
    if model == "vqa":
        return cfg.codec, cfg.gray, cfg.slice, cfg.circuit, cfg.optimizer
    if model == "ml":
        return cfg.codec, cfg.gray, cfg.slice, cfg.layers, cfg.optim.kind
    if model == "monte_carlo":
        return cfg["codec"], cfg["gray"], 1.0, 0, "none"
    return "none", False, 1.0, 0, "none"


def _config_dict(cfg) -> dict:
    return cfg if isinstance(cfg, dict) else asdict(cfg)


def _job(args):
    model, inst_spec, cfg, seed, budget = args
    inst = _resolve_instance(inst_spec)
    try:
        return run_model(model, inst, cfg, seed, budget), None
    except TspError as exc:
        return None, f"{type(exc).__name__}: {exc}"


def _map(jobs: list, workers: int) -> list:
    if workers <= 1 or len(jobs) <= 1:
        return [_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_job, jobs))


def run_plan(plan: ExperimentPlan, jobs: int = 1) -> list:
    """Execute every cell of ``plan`` and aggregate one row per (n, model, config).

    Learning models run first; Monte Carlo then receives, per instance, the
    maximum bit-string count over the matched cell's runs.  A failing run
    marks its row with an error instead of stopping the plan.
    """
    instances = [_resolve_instance(s) for s in plan.instances]
    references = []
    for spec, inst in zip(plan.instances, instances):
        if "reference" in spec:
            references.append(float(spec["reference"]))
        elif inst.n <= MAX_BRUTE_FORCE_N:
            references.append(brute_force_optimum(inst)[1])
        else:
            references.append(None)

    cells = plan.cells()
    records = {}  # (cell, model, inst) -> list of (record or None, error)
    order = [m for m in plan.models if m != "monte_carlo"] + (["monte_carlo"] if "monte_carlo" in plan.models else [])
    configs = {}
    for ci, overrides in enumerate(cells):
        for model in plan.models:
            try:
                configs[ci, model] = model_config(model, overrides)
            except TspError as exc:
                configs[ci, model] = exc

    for model in order:
        batch, keys = [], []
        for ci in range(1 if model == "greedy" else len(cells)):
            cfg = configs[ci, model]
            if isinstance(cfg, Exception):
                continue
            for ii, spec in enumerate(plan.instances):
                budget = None
                if model == "monte_carlo":
                    budget = _matched_budget(plan, records, configs, ci, ii)
                    if budget is None:
                        records.setdefault((ci, model, ii), []).append((None, "no matched budget"))
                        continue
                runs = 1 if model == "greedy" else plan.runs
                for run in range(runs):
                    batch.append((model, spec, cfg, derive_seed(plan.seed, ii, run), budget))
                    keys.append((ci, model, ii))
        for key, result in zip(keys, _map(batch, jobs)):
            records.setdefault(key, []).append(result)

    # a reference for instances beyond brute force: the best tour any model found
    for ii, ref in enumerate(references):
        if ref is None:
            found = [rec.best_distance for (ci, m, i), rs in records.items() if i == ii for rec, _ in rs if rec]
            if found:
                log.warning("instance %s has no reference optimum; using the best tour found", instances[ii].name)
                references[ii] = min(found)

    rows = []
    for ci in range(len(cells)):
        for model in plan.models:
            if model == "greedy" and ci > 0:
                continue  # configuration-independent, reported once
            cfg = configs[ci, model]
            by_n = {}
            for ii, inst in enumerate(instances):
                by_n.setdefault(inst.n, []).append(ii)
            for n, idxs in by_n.items():
                rows.append(_aggregate(model, cfg, n, idxs, records, references, ci))
    return rows


def _matched_budget(plan, records, configs, ci, ii) -> Optional[int]:
    matched = records.get((ci, plan.match, ii))
    if matched:
        counts = [rec.bitstrings for rec, _ in matched if rec is not None]
        return max(counts) if counts else None
    return plan.budget


def _aggregate(model, cfg, n, idxs, records, references, ci) -> ResultRow:
    if isinstance(cfg, Exception):
        return ResultRow(n, model, "", False, 0.0, 0, "", 0, None, None, 0, 0.0, None, error=str(cfg))
    desc = _describe(model, cfg)
    qualities, counts, seconds, errors = [], [], [], []
    for ii in idxs:
        for rec, err in records.get((ci, model, ii), []):
            if rec is None:
                errors.append(err)
                continue
            if references[ii] is not None:
                rec.reference = references[ii]
                rec.quality = references[ii] / rec.best_distance
                qualities.append(rec.quality)
            counts.append(rec.bitstrings)
            seconds.append(rec.seconds or 0.0)
    mean_q = math.fsum(qualities) / len(qualities) if qualities else None
    bitstrings = math.fsum(counts) / len(counts) if counts else 0.0
    return ResultRow(
        n=n, model=model, codec=desc[0], gray=desc[1], slice=desc[2], circuit_or_layers=desc[3],
        optimizer=desc[4], r=len(qualities), mean_quality=mean_q, sem=sem(qualities),
        bitstrings=bitstrings, coverage=coverage(bitstrings, n).coverage,
        seconds=math.fsum(seconds) if seconds else None, digest=config_digest(_config_dict(cfg)),
        qualities=qualities, error="; ".join(sorted(set(errors))) or None,
    )


def write_results(rows: list, path, timing: bool = False) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in rows:
            w.writerow(row.csv_row(timing))
