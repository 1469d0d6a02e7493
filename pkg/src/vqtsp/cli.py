"""Command-line entry point: ``vqtsp {solve,oracle,benchmark,sweep,estimate,generate,circuit}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .bench import ExperimentPlan, load_plan, run_plan, write_results
from .codec import FACTORIAL, NON_FACTORIAL, bit_length
from .config import (
    DEFAULTS,
    MlConfig,
    OptimConfig,
    ParamShiftConfig,
    SpsaConfig,
    VqaConfig,
)
from .cost import distinct_cycles
from .errors import ConfigError, DataError, ResourceLimitError, TspError
from .ml import run_ml
from .optimize import estimate_runtime, run_vqa
from .qsim import build_circuit
from .tsp import brute_force_optimum, load_instance, load_reference_optima, random_instance, save_instance

log = logging.getLogger("vqtsp")

EXIT_OK, EXIT_CONFIG, EXIT_RESOURCE, EXIT_DATA = 0, 2, 3, 4
# quality is reported automatically when brute force takes at most a few seconds
AUTO_REFERENCE_MAX_N = 11


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    d = DEFAULTS
    g = p.add_argument_group("formulation")
    g.add_argument("--model", choices=("vqa", "ml"), default="vqa")
    g.add_argument("--codec", choices=(NON_FACTORIAL, FACTORIAL), default=d["codec"])
    g.add_argument("--gray", action=argparse.BooleanOptionalAction, default=d["gray"])
    g.add_argument("--gray-scope", choices=("chunk", "word"), default="chunk")
    g.add_argument("--warm-start", action=argparse.BooleanOptionalAction, default=d["warm_start"])
    g.add_argument("--cache", action=argparse.BooleanOptionalAction, default=True)

    g = p.add_argument_group("variational circuit")
    g.add_argument("--circuit", type=int, choices=(1, 2, 3, 4, 5), default=d["circuit"])
    g.add_argument("--optimizer", choices=("spsa", "param_shift"), default=d["optimizer"])
    g.add_argument("--iterations", type=int, default=d["iterations"])
    g.add_argument("--shots", type=int, default=d["shots"])
    g.add_argument("--slice", type=float, default=d["slice"])
    g.add_argument("--A", dest="A", type=float, default=d["A"])
    g.add_argument("--c", dest="c", type=float, default=d["c"])
    g.add_argument("--alpha", type=float, default=d["alpha"])
    g.add_argument("--gamma", type=float, default=d["gamma"])
    g.add_argument("--eta", type=float, default=d["eta"], help="SPSA learning rate")
    g.add_argument("--ps-eta", type=float, default=d["ps_eta"], help="parameter-shift learning rate")
    g.add_argument("--s", dest="s", type=float, default=d["s"], help="parameter-shift scale")
    g.add_argument("--init-angle", type=float, default=0.0)
    g.add_argument("--backend", choices=("auto", "dense", "product", "mps"), default="auto")
    g.add_argument("--rzz-params", action=argparse.BooleanOptionalAction, default=True)

    g = p.add_argument_group("classical model")
    g.add_argument("--layers", type=int, default=d["layers"])
    g.add_argument("--inputs", type=int, default=d["inputs"])
    g.add_argument("--input-mode", choices=("zeros", "halves"), default=d["input_mode"])
    g.add_argument("--epochs", type=int, default=d["epochs"])
    g.add_argument("--ml-slice", type=float, default=d["ml_slice"])
    g.add_argument("--sigma", type=float, default=d["sigma"])
    g.add_argument("--ml-optimizer", choices=("sgd", "adam"), default=d["ml_optimizer"])
    g.add_argument("--ml-lr", type=float, default=None, help="default: 2e-5 for sgd, 0.001 for adam")
    g.add_argument("--momentum", type=float, default=None, help="SGD momentum or Adam beta1; default 0.8 / 0.9")
    g.add_argument("--weight-decay", type=float, default=None, help="default: 0.0006 for sgd, 0.0032 for adam")


def vqa_config(ns) -> VqaConfig:
    return VqaConfig(
        circuit=ns.circuit, codec=ns.codec, gray=ns.gray, gray_scope=ns.gray_scope, slice=ns.slice,
        optimizer=ns.optimizer, warm_start=ns.warm_start, init_angle=ns.init_angle, backend=ns.backend,
        cache=ns.cache, rzz_params=ns.rzz_params,
        spsa=SpsaConfig(A=ns.A, c=ns.c, alpha=ns.alpha, gamma=ns.gamma, eta=ns.eta,
                        iterations=ns.iterations, shots=ns.shots),
        param_shift=ParamShiftConfig(s=ns.s, eta=ns.ps_eta, iterations=ns.iterations, shots=ns.shots),
    )


def ml_config(ns) -> MlConfig:
    optim = OptimConfig.defaults(ns.ml_optimizer, eta=ns.ml_lr, momentum=ns.momentum, weight_decay=ns.weight_decay)
    return MlConfig(
        layers=ns.layers, inputs=ns.inputs, input_mode=ns.input_mode, warm_start=ns.warm_start, sigma=ns.sigma,
        epochs=ns.epochs, slice=ns.ml_slice, codec=ns.codec, gray=ns.gray, gray_scope=ns.gray_scope,
        cache=ns.cache, optim=optim,
    )


def build_parser():
    parser = argparse.ArgumentParser(prog="vqtsp", description="Penalty-free variational and classical TSP solvers.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for progress, -vv for per-iteration lines")
    parser.add_argument("--config", type=Path, help="JSON file of flag defaults (keys are flag names with underscores)")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = subs["solve"] = sub.add_parser("solve", help="run one model on one instance")
    p.add_argument("instance", type=Path)
    _add_model_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reference", type=float, help="known optimum, for the quality figure")
    p.add_argument("--output", type=Path, help="write the run record as JSON")
    p.add_argument("--trace", type=Path, help="write the per-iteration trace as CSV")
    p.add_argument("--timing", action="store_true", help="include wall time in written files")

    p = subs["oracle"] = sub.add_parser("oracle", help="exact optimum by enumeration")
    p.add_argument("instance", type=Path)

    p = subs["benchmark"] = sub.add_parser("benchmark", help="repeat a model on instances with matched baselines")
    p.add_argument("instances", type=Path, nargs="+")
    _add_model_flags(p)
    p.add_argument("--baselines", default="monte_carlo,greedy", help="comma-separated; empty for none")
    p.add_argument("--runs", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--references", type=Path, help="CSV sidecar of name,optimum")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--output", type=Path)
    p.add_argument("--timing", action="store_true")

    p = subs["sweep"] = sub.add_parser("sweep", help="run an experiment plan")
    p.add_argument("plan", type=Path)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--output", type=Path)
    p.add_argument("--timing", action="store_true")

    p = subs["estimate"] = sub.add_parser("estimate", help="projected hardware run time, 4 I n_shot t_shot")
    p.add_argument("--iterations", type=int, default=DEFAULTS["iterations"])
    p.add_argument("--shots", type=int, default=DEFAULTS["shots"])
    p.add_argument("--t-shot", type=float, default=2e-6, help="seconds per shot")

    p = subs["generate"] = sub.add_parser("generate", help="write a uniform random instance")
    p.add_argument("output", type=Path)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=float, default=100.0)

    p = subs["circuit"] = sub.add_parser("circuit", help="print a circuit netlist")
    p.add_argument("--circuit", type=int, choices=(1, 2, 3, 4, 5), default=DEFAULTS["circuit"])
    p.add_argument("--locations", type=int, required=True)
    p.add_argument("--codec", choices=(NON_FACTORIAL, FACTORIAL), default=DEFAULTS["codec"])
    p.add_argument("--rzz-params", action=argparse.BooleanOptionalAction, default=True)
    return parser, subs


def parse_args(argv=None):
    parser, subs = build_parser()
    ns = parser.parse_args(argv)
    if ns.config is not None:
        try:
            data = json.loads(ns.config.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise DataError(f"{ns.config}: no such config file") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{ns.config}: invalid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{ns.config}: expected a JSON object")
        unknown = set(data) - set(vars(ns))
        if unknown:
            raise ConfigError(f"{ns.config}: unknown keys {sorted(unknown)}")
        # config values replace defaults; flags given on the command line still win
        subs[ns.command].set_defaults(**data)
        ns = parser.parse_args(argv)
    return ns


def _reference_for(inst, given):
    if given is not None:
        return given
    if inst.n <= AUTO_REFERENCE_MAX_N:
        return brute_force_optimum(inst)[1]
    return None


def cmd_solve(ns) -> int:
    inst = load_instance(ns.instance)
    record = run_vqa(inst, vqa_config(ns), ns.seed) if ns.model == "vqa" else run_ml(inst, ml_config(ns), ns.seed)
    ref = _reference_for(inst, ns.reference)
    if ref is not None:
        record.reference = ref
        record.quality = ref / record.best_distance
    print(f"instance     {inst.name} (n={inst.n})")
    print(f"model        {record.model}")
    print(f"best cycle   {' '.join(map(str, record.best_cycle))}")
    print(f"distance     {record.best_distance:.6f}")
    if record.quality is not None:
        print(f"quality      {record.quality:.6f}")
    print(f"bit strings  {record.bitstrings} (hits {record.hits}, misses {record.misses})")
    print(f"coverage     {record.coverage:.6g}")
    print(f"elapsed      {record.seconds:.2f} s")
    if ns.output:
        ns.output.write_text(record.to_json(timing=ns.timing), encoding="utf-8")
    if ns.trace:
        ns.trace.write_text(record.trace_csv(), encoding="utf-8")
    return EXIT_OK


def cmd_oracle(ns) -> int:
    inst = load_instance(ns.instance)
    cycle, length = brute_force_optimum(inst)
    print(f"cycle     {' '.join(map(str, cycle))}")
    print(f"distance  {length!r}")
    return EXIT_OK


def _flat_overrides(ns) -> dict:
    vqa, ml = vqa_config(ns), ml_config(ns)
    flat = asdict(vqa)
    m = asdict(ml)
    m["ml_slice"] = m.pop("slice")
    flat.update({k: v for k, v in m.items() if k not in flat})
    return flat


def _print_rows(rows) -> None:
    print(f"{'n':>3} {'model':<12} {'r':>3} {'quality':>9} {'sem':>9} {'bit strings':>12} {'coverage':>10}")
    for row in rows:
        q = "-" if row.mean_quality is None else f"{row.mean_quality:.4f}"
        s = "-" if row.sem is None else f"{row.sem:.4f}"
        print(f"{row.n:>3} {row.model:<12} {row.r:>3} {q:>9} {s:>9} {row.bitstrings:>12.0f} {row.coverage:>10.4g}")
        if row.error:
            print(f"    error: {row.error}", file=sys.stderr)


def cmd_benchmark(ns) -> int:
    refs = load_reference_optima(ns.references) if ns.references else {}
    instances = []
    for path in ns.instances:
        spec = {"path": str(path)}
        name = path.stem
        if name in refs:
            spec["reference"] = refs[name]
        instances.append(spec)
    baselines = [b for b in ns.baselines.split(",") if b]
    plan = ExperimentPlan(
        instances=instances, models=[ns.model] + baselines, base=_flat_overrides(ns), runs=ns.runs,
        seed=ns.seed, match=ns.model,
    )
    rows = run_plan(plan, jobs=ns.jobs)
    _print_rows(rows)
    if ns.output:
        write_results(rows, ns.output, timing=ns.timing)
    return EXIT_OK


def cmd_sweep(ns) -> int:
    plan = load_plan(ns.plan)
    rows = run_plan(plan, jobs=ns.jobs)
    _print_rows(rows)
    if ns.output:
        write_results(rows, ns.output, timing=ns.timing)
    return EXIT_OK


def cmd_estimate(ns) -> int:
    t = estimate_runtime(ns.iterations, ns.shots, ns.t_shot)
    print(f"T = 4 * I * n_shot * t_shot = 4 * {ns.iterations} * {ns.shots} * {ns.t_shot!r} = {t:.6g} s")
    return EXIT_OK


def cmd_generate(ns) -> int:
    inst = random_instance(ns.n, ns.seed, size=ns.size)
    save_instance(inst, ns.output)
    print(f"wrote {ns.n} locations to {ns.output}")
    return EXIT_OK


def cmd_circuit(ns) -> int:
    q = bit_length(ns.codec, ns.locations)
    spec = build_circuit(ns.circuit, q, rzz_params=ns.rzz_params)
    print(f"# circuit {spec.id}, {q} qubits, {spec.param_count} parameters, {distinct_cycles(ns.locations)} distinct cycles")
    print(spec.netlist().rstrip("\n"))
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "oracle": cmd_oracle,
    "benchmark": cmd_benchmark,
    "sweep": cmd_sweep,
    "estimate": cmd_estimate,
    "generate": cmd_generate,
    "circuit": cmd_circuit,
}


def main(argv=None) -> int:
    try:
        ns = parse_args(argv)
        level = logging.WARNING if ns.verbose == 0 else logging.INFO if ns.verbose == 1 else logging.DEBUG
        logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[ns.command](ns)
    except ConfigError as exc:
        print(f"vqtsp: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceLimitError as exc:
        print(f"vqtsp: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (DataError, OSError) as exc:
        print(f"vqtsp: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except TspError as exc:
        print(f"vqtsp: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
